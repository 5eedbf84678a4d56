// SPDX-License-Identifier: Apache-2.0
#include "dloamp/ofdm.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dloamp {

namespace {

int int_log2(int v) {
  int b = 0;
  while ((1 << b) < v) ++b;
  return b;
}

// Gray label of ascending level index i.
inline unsigned gray_encode(unsigned i) { return i ^ (i >> 1); }

unsigned gray_decode(unsigned g) {
  unsigned i = 0;
  for (; g; g >>= 1) i ^= g;
  return i;
}

}  // namespace

Constellation make_constellation(int order) {
  if (order != 4 && order != 16 && order != 64)
    throw std::invalid_argument("make_constellation: order must be 4, 16 or 64");
  Constellation c;
  c.order = order;
  c.bits_per_symbol = int_log2(order);
  const int side = 1 << (c.bits_per_symbol / 2);  // sqrt(M) levels per axis

  // Unit average energy: E|c|^2 = 2 * mean(level^2) = 1.
  double sum_sq = 0.0;
  for (int i = 0; i < side; ++i) {
    const double lvl = 2.0 * i - (side - 1);
    sum_sq += lvl * lvl;
  }
  const double scale = 1.0 / std::sqrt(2.0 * sum_sq / side);

  c.real_levels.resize(side);
  for (int i = 0; i < side; ++i) c.real_levels[static_cast<size_t>(i)] = scale * (2.0 * i - (side - 1));

  const int axis_bits = c.bits_per_symbol / 2;
  c.points.resize(static_cast<size_t>(order));
  for (int m = 0; m < order; ++m) {
    const unsigned hi = static_cast<unsigned>(m) >> axis_bits;          // real-axis label
    const unsigned lo = static_cast<unsigned>(m) & ((1u << axis_bits) - 1u);  // imag-axis label
    const unsigned ire = gray_decode(hi);
    const unsigned iim = gray_decode(lo);
    c.points[static_cast<size_t>(m)] = Cplx(c.real_levels[ire], c.real_levels[iim]);
  }
  return c;
}

CVec qam_modulate(const std::vector<std::uint8_t>& bits, const Constellation& c) {
  if (bits.size() % static_cast<size_t>(c.bits_per_symbol) != 0)
    throw std::invalid_argument("qam_modulate: bit count not divisible by log2(M)");
  const size_t n_sym = bits.size() / static_cast<size_t>(c.bits_per_symbol);
  CVec out(static_cast<Eigen::Index>(n_sym));
  for (size_t s = 0; s < n_sym; ++s) {
    unsigned m = 0;
    for (int b = 0; b < c.bits_per_symbol; ++b)
      m = (m << 1) | (bits[s * static_cast<size_t>(c.bits_per_symbol) + static_cast<size_t>(b)] & 1u);
    out(static_cast<Eigen::Index>(s)) = c.points[m];
  }
  return out;
}

std::vector<std::uint8_t> qam_hard_demod(const CVec& symbols, const Constellation& c) {
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<size_t>(symbols.size()) * static_cast<size_t>(c.bits_per_symbol));
  for (Eigen::Index s = 0; s < symbols.size(); ++s) {
    int best = 0;
    double best_d = std::norm(symbols(s) - c.points[0]);
    for (int m = 1; m < c.order; ++m) {
      const double d = std::norm(symbols(s) - c.points[static_cast<size_t>(m)]);
      if (d < best_d) {  // strict: ties stay with the smaller index
        best_d = d;
        best = m;
      }
    }
    for (int b = c.bits_per_symbol - 1; b >= 0; --b)
      bits.push_back(static_cast<std::uint8_t>((best >> b) & 1));
  }
  return bits;
}

CVec make_pilot_symbol(int n_subcarriers, std::uint64_t seed) {
  const Constellation qpsk = make_constellation(4);
  const auto bits = random_bits(static_cast<size_t>(2 * n_subcarriers), seed);
  return qam_modulate(bits, qpsk);
}

OfdmFrame make_frame(const std::vector<std::uint8_t>& data_bits, const Constellation& c,
                     const CVec& u_pilot) {
  OfdmFrame f;
  f.data_bits = data_bits;
  f.u_pilot = u_pilot;
  f.u_data = qam_modulate(data_bits, c);
  if (f.u_data.size() != u_pilot.size())
    throw std::invalid_argument("make_frame: data symbol count does not match pilot length");
  f.q_pilot = ifft_unitary(f.u_pilot);
  f.q_data = ifft_unitary(f.u_data);
  return f;
}

CMat build_cyclic_H(const ChannelRealization& ch, int n) {
  const int len = ch.tap_count();
  if (len > n) throw std::invalid_argument("build_cyclic_H: more taps than subcarriers");
  CMat h = CMat::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int l = 0; l < len; ++l) h(r, ((r - l) % n + n) % n) = ch.taps(l);
  return h;
}

CMat build_cutoff_A(const ChannelRealization& ch, int n) {
  const int len = ch.tap_count();
  if (len > n) throw std::invalid_argument("build_cutoff_A: more taps than subcarriers");
  CMat a = CMat::Zero(n, n);
  for (int r = 0; r <= len - 2; ++r)
    for (int k = 1; k <= len - 1 - r; ++k) a(r, n - k) = ch.taps(k + r);
  return a;
}

// s[r] = sum_{l<=r} h_l q[r-l]
CVec apply_channel_toeplitz(const CVec& taps, const CVec& q) {
  const int n = static_cast<int>(q.size());
  const int len = static_cast<int>(taps.size());
  CVec s = CVec::Zero(n);
  for (int r = 0; r < n; ++r) {
    Cplx acc(0.0, 0.0);
    const int lmax = std::min(len - 1, r);
    for (int l = 0; l <= lmax; ++l) acc += taps(l) * q(r - l);
    s(r) = acc;
  }
  return s;
}

CVec apply_channel_cutoff(const CVec& taps, const CVec& q_prev) {
  const int n = static_cast<int>(q_prev.size());
  const int len = static_cast<int>(taps.size());
  CVec s = CVec::Zero(n);
  for (int r = 0; r <= len - 2; ++r) {
    Cplx acc(0.0, 0.0);
    for (int k = 1; k <= len - 1 - r; ++k) acc += taps(k + r) * q_prev(n - k);
    s(r) = acc;
  }
  return s;
}

double snr_to_noise_var(const ChannelRealization& ch, const OfdmFrame& frame, double snr_db) {
  const int n = static_cast<int>(frame.q_pilot.size());
  const CVec s_p = apply_channel_toeplitz(ch.taps, frame.q_pilot);
  const CVec s_d = apply_channel_toeplitz(ch.taps, frame.q_data);
  const double s_bar = (s_p.squaredNorm() + s_d.squaredNorm()) / (2.0 * n);
  return s_bar * std::pow(10.0, -snr_db / 10.0);
}

RxFrame transmit_cp_free(const OfdmFrame& frame, const ChannelRealization& ch, double snr_db,
                         std::uint64_t noise_seed, const CVec* q_prev_frame_data) {
  const int n = static_cast<int>(frame.q_pilot.size());
  if (ch.tap_count() > n)
    throw std::invalid_argument("transmit_cp_free: more taps than subcarriers");
  if (q_prev_frame_data && q_prev_frame_data->size() != n)
    throw std::invalid_argument("transmit_cp_free: q_prev length mismatch");

  RxFrame rx;
  rx.snr_db = snr_db;
  rx.noise_var = snr_to_noise_var(ch, frame, snr_db);
  rx.q_prev_data = frame.q_pilot;

  CVec y_p = apply_channel_toeplitz(ch.taps, frame.q_pilot);
  if (q_prev_frame_data) y_p += apply_channel_cutoff(ch.taps, *q_prev_frame_data);
  CVec y_d = apply_channel_toeplitz(ch.taps, frame.q_data) +
             apply_channel_cutoff(ch.taps, frame.q_pilot);

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double amp = std::sqrt(rx.noise_var / 2.0);
  for (int i = 0; i < n; ++i) y_p(i) += Cplx(amp * gauss(rng), amp * gauss(rng));
  for (int i = 0; i < n; ++i) y_d(i) += Cplx(amp * gauss(rng), amp * gauss(rng));

  rx.y_pilot = std::move(y_p);
  rx.y_data = std::move(y_d);
  return rx;
}

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(count);
  std::uint64_t buf = 0;
  int avail = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (avail == 0) {
      buf = rng();
      avail = 64;
    }
    bits[i] = static_cast<std::uint8_t>(buf & 1u);
    buf >>= 1;
    --avail;
  }
  return bits;
}

long count_bit_errors(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("count_bit_errors: length mismatch");
  long errs = 0;
  for (size_t i = 0; i < a.size(); ++i) errs += (a[i] != b[i]) ? 1 : 0;
  return errs;
}

}  // namespace dloamp
