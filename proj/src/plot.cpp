// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

#include "dloamp/harness.hpp"

namespace dloamp {

namespace {

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void render_ber_svg(const std::vector<BerRecord>& records, const std::string& path) {
  if (records.empty()) throw std::runtime_error("render_ber_svg: no records");

  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  double snr_min = 1e300, snr_max = -1e300, ber_min = 1.0;
  for (const auto& r : records) {
    snr_min = std::min(snr_min, r.snr_db);
    snr_max = std::max(snr_max, r.snr_db);
    if (r.ber > 0.0) {
      curves[r.receiver].push_back({r.snr_db, r.ber});
      ber_min = std::min(ber_min, r.ber);
    } else {
      curves[r.receiver];  // receiver appears in the legend even if all-zero
    }
  }
  if (snr_max <= snr_min) snr_max = snr_min + 1.0;
  const double log_top = 0.0;                                       // BER 1
  const double log_bot = std::floor(std::log10(ber_min)) - 0.5;     // half a decade of margin

  const double w = 640, h = 480, ml = 70, mr = 170, mt = 30, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;
  auto xpos = [&](double snr) { return ml + pw * (snr - snr_min) / (snr_max - snr_min); };
  auto ypos = [&](double ber) {
    return mt + ph * (log_top - std::log10(ber)) / (log_top - log_bot);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("render_ber_svg: cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // decade grid lines and y labels
  for (int d = 0; d >= static_cast<int>(log_bot); --d) {
    const double y = ypos(std::pow(10.0, d));
    out << "<line x1=\"" << ml << "\" y1=\"" << fmt(y) << "\" x2=\"" << ml + pw << "\" y2=\""
        << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">1e" << d
        << "</text>\n";
  }
  // x ticks at the observed SNR points
  std::vector<double> xs;
  for (const auto& r : records) xs.push_back(r.snr_db);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double snr : xs) {
    const double x = xpos(snr);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << mt + ph << "\" x2=\"" << fmt(x) << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << mt + ph + 20
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << snr
        << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">SNR (dB)"
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">BER</text>\n";

  int color_idx = 0;
  double legend_y = mt + 10;
  for (const auto& [name, pts] : curves) {
    const char* color = kColors[color_idx % 8];
    ++color_idx;
    if (!pts.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [snr, ber] : pts) out << fmt(xpos(snr)) << "," << fmt(ypos(ber)) << " ";
      out << "\"/>\n";
      for (const auto& [snr, ber] : pts)
        out << "<circle cx=\"" << fmt(xpos(snr)) << "\" cy=\"" << fmt(ypos(ber))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << fmt(legend_y - 4) << "\" x2=\""
        << ml + pw + 32 << "\" y2=\"" << fmt(legend_y - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw + 38 << "\" y=\"" << fmt(legend_y)
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << name << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("render_ber_svg: write failure on " + path);
}

}  // namespace dloamp
