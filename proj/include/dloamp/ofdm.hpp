// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dloamp/channel.hpp"
#include "dloamp/numerics.hpp"

namespace dloamp {

/// Square M-QAM with Gray bit labels and unit average energy.
///
/// A symbol takes log2(M) bits, MSB first; the upper half selects the real
/// level, the lower half the imaginary level.  Per axis, the ascending level
/// index i carries the Gray label i ^ (i >> 1), so 16-QAM real levels
/// {-3,-1,1,3}/sqrt(10) read 00,01,11,10.
struct Constellation {
  int order = 0;            // M: 4, 16 or 64
  int bits_per_symbol = 0;  // log2(M)
  std::vector<Cplx> points;           // indexed by bit-label value
  std::vector<double> real_levels;    // ascending real sub-alphabet
};

Constellation make_constellation(int order);

CVec qam_modulate(const std::vector<std::uint8_t>& bits, const Constellation& c);

/// Nearest-point hard decisions; ties go to the smaller point index.
std::vector<std::uint8_t> qam_hard_demod(const CVec& symbols, const Constellation& c);

/// One frame: a pilot OFDM symbol followed by a data OFDM symbol.
struct OfdmFrame {
  std::vector<std::uint8_t> pilot_bits, data_bits;
  CVec u_pilot, u_data;  // frequency domain
  CVec q_pilot, q_data;  // time domain, q = F^H u
};

/// The fixed full-band QPSK pilot, identical across frames and known to the
/// receiver.
inline constexpr std::uint64_t kPilotSeed = 0x70696c6f74ULL;
CVec make_pilot_symbol(int n_subcarriers, std::uint64_t seed = kPilotSeed);

OfdmFrame make_frame(const std::vector<std::uint8_t>& data_bits, const Constellation& c,
                     const CVec& u_pilot);

/// Circulant channel matrix; first column [h_0..h_{L-1}, 0, ...].
CMat build_cyclic_H(const ChannelRealization& ch, int n);

/// Cut-off matrix: the upper-right wrap-around triangle of the circulant,
/// A(r, N-k) = h_{k+r} for k = 1..L-1-r.  H - A is the linear-convolution
/// Toeplitz truncation.
CMat build_cutoff_A(const ChannelRealization& ch, int n);

/// Received CP-free frame.  noise_var is the total complex noise variance
/// per sample; q_prev_data is the interferer of the data symbol (the pilot's
/// time-domain signal, known at the receiver).
struct RxFrame {
  CVec y_pilot, y_data;
  double snr_db = 0.0;
  double noise_var = 0.0;
  CVec q_prev_data;
};

/// (H - A) q without building the matrix: causal truncated convolution.
CVec apply_channel_toeplitz(const CVec& taps, const CVec& q);

/// A q_prev without building the matrix: the previous block's tail leaking
/// into the first L-1 samples.
CVec apply_channel_cutoff(const CVec& taps, const CVec& q_prev);

/// sigma_w^2 = s_bar * 10^{-snr/10}; s_bar is the mean per-sample power of
/// s = (H - A) F^H u over the frame's two symbols.
double snr_to_noise_var(const ChannelRealization& ch, const OfdmFrame& frame, double snr_db);

/// CP-free reception: y = (H - A) q + A q_prev + w for each symbol.  The
/// pilot's interferer is the previous frame's data signal (zero for the very
/// first frame); the data symbol's interferer is this frame's pilot.
RxFrame transmit_cp_free(const OfdmFrame& frame, const ChannelRealization& ch, double snr_db,
                         std::uint64_t noise_seed, const CVec* q_prev_frame_data = nullptr);

/// Payload-side helpers.
std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed);
long count_bit_errors(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

}  // namespace dloamp
