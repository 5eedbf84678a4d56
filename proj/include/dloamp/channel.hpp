// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dloamp/numerics.hpp"

namespace dloamp {

/// Expected power per tap, normalized to unit total power.
struct PowerDelayProfile {
  std::vector<double> tap_powers;
  int taps() const { return static_cast<int>(tap_powers.size()); }
};

/// One block-fading multipath realization.
struct ChannelRealization {
  CVec taps;
  std::uint64_t seed = 0;
  int tap_count() const { return static_cast<int>(taps.size()); }
};

/// Exponentially decaying profile: p_l proportional to exp(-l/decay).
PowerDelayProfile exp_pdp(int taps, double decay);

/// Rayleigh taps, h_l = sqrt(p_l/2) * (g1 + j*g2), deterministic in the seed.
ChannelRealization draw_taps(const PowerDelayProfile& pdp, std::uint64_t seed);

/// g_n = sum_l h_l e^{-j*2*pi*n*l/N}; the eigenvalues of the cyclic channel
/// matrix, i.e. F * H * F^H = diag(g).
CVec freq_response(const ChannelRealization& ch, int n_subcarriers);

/// Frequency-domain correlation R(m,n) = sum_l p_l e^{-j*2*pi*(m-n)*l/N}.
/// Hermitian with unit diagonal.
CMat channel_correlation(const PowerDelayProfile& pdp, int n_subcarriers);

}  // namespace dloamp
