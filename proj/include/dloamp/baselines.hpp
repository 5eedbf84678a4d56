// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dloamp/ce_net.hpp"
#include "dloamp/channel.hpp"
#include "dloamp/ofdm.hpp"

namespace dloamp {

/// Reference receivers bounding the OAMP chain from below and above.
enum class BaselineKind {
  LS_MMSE,            // LS channel estimate, per-subcarrier MMSE, no ISI handling
  LMMSE_MMSE,         // LMMSE channel estimate, per-subcarrier MMSE
  CE_OAMP,            // CE front end + classic OAMP detection
  MMSE_CP,            // CP-OFDM, LMMSE estimate, per-subcarrier MMSE
  ML_CP_PERFECT_CSI,  // CP-OFDM, true CSI, per-subcarrier ML (upper bound)
  ISI_CANCEL_MMSE,    // ISI cancellation then per-subcarrier MMSE, ICI ignored
};

/// X_hat(n) = conj(H_n) Y_n / (|H_n|^2 + sigma_w^2).
CVec mmse_equalize_per_subcarrier(const CVec& y_fd, const CVec& h_est, double noise_var);

/// argmin over the constellation of |Y_n - H_n c|^2; ties to the lower index.
CVec ml_per_subcarrier(const CVec& y_fd, const CVec& h, const Constellation& c);

enum class CpEstimator { Ls, Lmmse, Perfect };
enum class CpDetector { Mmse, Ml };

/// Conventional CP-OFDM reference: serializes the frame with cyclic prefixes
/// of length L-1, runs the multipath channel sample by sample, strips the
/// prefixes and detects per subcarrier (the model Y_n = g_n U_n + W_n is then
/// exact).  r_hh is only needed for the LMMSE estimator.
std::vector<std::uint8_t> detect_with_cp(const OfdmFrame& frame, const ChannelRealization& ch,
                                         double snr_db, CpEstimator est, CpDetector det,
                                         const Constellation& c, std::uint64_t noise_seed,
                                         const CMat* r_hh = nullptr);

/// Simplified ISI-cancellation chain: remove the previous block's tail using
/// the estimated taps, FFT, then per-subcarrier MMSE with the estimated
/// frequency response.  Residual ICI is left untreated.
std::vector<std::uint8_t> isi_cancel_mmse_detect(const RxFrame& rx, const CVec& h_freq_est,
                                                 int taps, const Constellation& c);

}  // namespace dloamp
