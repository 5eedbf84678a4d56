// SPDX-License-Identifier: Apache-2.0
#include "dloamp/baselines.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "dloamp/oamp.hpp"

namespace dloamp {

CVec mmse_equalize_per_subcarrier(const CVec& y_fd, const CVec& h_est, double noise_var) {
  if (y_fd.size() != h_est.size())
    throw std::invalid_argument("mmse_equalize_per_subcarrier: length mismatch");
  CVec x(y_fd.size());
  for (Eigen::Index n = 0; n < y_fd.size(); ++n)
    x(n) = std::conj(h_est(n)) * y_fd(n) / (std::norm(h_est(n)) + noise_var);
  return x;
}

CVec ml_per_subcarrier(const CVec& y_fd, const CVec& h, const Constellation& c) {
  if (y_fd.size() != h.size()) throw std::invalid_argument("ml_per_subcarrier: length mismatch");
  CVec x(y_fd.size());
  for (Eigen::Index n = 0; n < y_fd.size(); ++n) {
    int best = 0;
    double best_d = std::norm(y_fd(n) - h(n) * c.points[0]);
    for (int m = 1; m < c.order; ++m) {
      const double d = std::norm(y_fd(n) - h(n) * c.points[static_cast<size_t>(m)]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    x(n) = c.points[static_cast<size_t>(best)];
  }
  return x;
}

std::vector<std::uint8_t> detect_with_cp(const OfdmFrame& frame, const ChannelRealization& ch,
                                         double snr_db, CpEstimator est, CpDetector det,
                                         const Constellation& c, std::uint64_t noise_seed,
                                         const CMat* r_hh) {
  const int n = static_cast<int>(frame.q_pilot.size());
  const int len = ch.tap_count();
  const int cp = len - 1;
  if (cp > n) throw std::invalid_argument("detect_with_cp: CP shorter than channel");

  // serialize [cp_p | q_p | cp_d | q_d] and run the channel sample by sample
  const int sym = n + cp;
  CVec stream(2 * sym);
  stream.segment(0, cp) = frame.q_pilot.tail(cp);
  stream.segment(cp, n) = frame.q_pilot;
  stream.segment(sym, cp) = frame.q_data.tail(cp);
  stream.segment(sym + cp, n) = frame.q_data;

  CVec rxs = CVec::Zero(2 * sym);
  for (int r = 0; r < 2 * sym; ++r) {
    Cplx acc(0.0, 0.0);
    const int lmax = std::min(len - 1, r);
    for (int l = 0; l <= lmax; ++l) acc += ch.taps(l) * stream(r - l);
    rxs(r) = acc;
  }

  // per-sample SNR against the circulant output power seen after CP removal
  const CMat h_circ = build_cyclic_H(ch, n);
  const double s_bar = ((h_circ * frame.q_pilot).squaredNorm() +
                        (h_circ * frame.q_data).squaredNorm()) /
                       (2.0 * n);
  const double noise_var = s_bar * std::pow(10.0, -snr_db / 10.0);

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double amp = std::sqrt(noise_var / 2.0);
  for (int r = 0; r < 2 * sym; ++r) rxs(r) += Cplx(amp * gauss(rng), amp * gauss(rng));

  const CVec y_pilot_fd = fft_unitary(rxs.segment(cp, n));
  const CVec y_data_fd = fft_unitary(rxs.segment(sym + cp, n));

  CVec g;
  switch (est) {
    case CpEstimator::Perfect:
      g = freq_response(ch, n);
      break;
    case CpEstimator::Ls:
      g = ls_estimate(y_pilot_fd, frame.u_pilot).h_ls;
      break;
    case CpEstimator::Lmmse: {
      if (!r_hh) throw std::invalid_argument("detect_with_cp: LMMSE estimator needs R_HH");
      const CMat w = lmmse_weights(*r_hh, noise_var, 1.0);
      g = w * ls_estimate(y_pilot_fd, frame.u_pilot).h_ls;
      break;
    }
  }

  CVec x_hat;
  if (det == CpDetector::Mmse)
    x_hat = mmse_equalize_per_subcarrier(y_data_fd, g, noise_var);
  else
    x_hat = ml_per_subcarrier(y_data_fd, g, c);
  return qam_hard_demod(x_hat, c);
}

std::vector<std::uint8_t> isi_cancel_mmse_detect(const RxFrame& rx, const CVec& h_freq_est,
                                                 int taps, const Constellation& c) {
  const CVec taps_est = estimated_taps(h_freq_est, taps);
  const CVec y_hat = isi_cancel(rx.y_data, taps_est, rx.q_prev_data);
  const CVec x_hat =
      mmse_equalize_per_subcarrier(fft_unitary(y_hat), h_freq_est, rx.noise_var);
  return qam_hard_demod(x_hat, c);
}

}  // namespace dloamp
