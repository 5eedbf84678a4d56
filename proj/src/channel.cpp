// SPDX-License-Identifier: Apache-2.0
#include "dloamp/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dloamp {

PowerDelayProfile exp_pdp(int taps, double decay) {
  if (taps < 1) throw std::invalid_argument("exp_pdp: need at least one tap");
  if (!(decay > 0.0)) throw std::invalid_argument("exp_pdp: decay must be positive");
  PowerDelayProfile pdp;
  pdp.tap_powers.resize(taps);
  double total = 0.0;
  for (int l = 0; l < taps; ++l) {
    pdp.tap_powers[l] = std::exp(-static_cast<double>(l) / decay);
    total += pdp.tap_powers[l];
  }
  for (double& p : pdp.tap_powers) p /= total;
  return pdp;
}

ChannelRealization draw_taps(const PowerDelayProfile& pdp, std::uint64_t seed) {
  if (pdp.taps() < 1) throw std::invalid_argument("draw_taps: empty profile");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ChannelRealization ch;
  ch.seed = seed;
  ch.taps.resize(pdp.taps());
  for (int l = 0; l < pdp.taps(); ++l) {
    const double amp = std::sqrt(pdp.tap_powers[static_cast<size_t>(l)] / 2.0);
    const double re = gauss(rng);
    const double im = gauss(rng);
    ch.taps(l) = Cplx(amp * re, amp * im);
  }
  return ch;
}

CVec freq_response(const ChannelRealization& ch, int n_subcarriers) {
  const int len = ch.tap_count();
  if (len > n_subcarriers)
    throw std::invalid_argument("freq_response: more taps than subcarriers");
  CVec g(n_subcarriers);
  for (int n = 0; n < n_subcarriers; ++n) {
    Cplx acc(0.0, 0.0);
    for (int l = 0; l < len; ++l) {
      const double ang =
          -2.0 * std::numbers::pi * static_cast<double>(n) * l / n_subcarriers;
      acc += ch.taps(l) * Cplx(std::cos(ang), std::sin(ang));
    }
    g(n) = acc;
  }
  return g;
}

CMat channel_correlation(const PowerDelayProfile& pdp, int n_subcarriers) {
  const int len = pdp.taps();
  // R depends on (m - n) mod N only, so fill from one length-N kernel.
  CVec kernel(n_subcarriers);
  for (int d = 0; d < n_subcarriers; ++d) {
    Cplx acc(0.0, 0.0);
    for (int l = 0; l < len; ++l) {
      const double ang =
          -2.0 * std::numbers::pi * static_cast<double>(d) * l / n_subcarriers;
      acc += pdp.tap_powers[static_cast<size_t>(l)] * Cplx(std::cos(ang), std::sin(ang));
    }
    kernel(d) = acc;
  }
  CMat r(n_subcarriers, n_subcarriers);
  for (int m = 0; m < n_subcarriers; ++m) {
    for (int n = 0; n < n_subcarriers; ++n) {
      const int d = ((m - n) % n_subcarriers + n_subcarriers) % n_subcarriers;
      r(m, n) = kernel(d);
    }
  }
  return r;
}

}  // namespace dloamp
