// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dloamp/adam.hpp"
#include "dloamp/channel.hpp"
#include "dloamp/numerics.hpp"
#include "dloamp/ofdm.hpp"

namespace dloamp {

/// Per-subcarrier least-squares channel estimate.
struct LsEstimate {
  CVec h_ls;
};

/// y_pilot_freq is the FFT of the received pilot; x_pilot the known
/// transmitted pilot.  H_ls(n) = Y_p(n) / X_p(n).
LsEstimate ls_estimate(const CVec& y_pilot_freq, const CVec& x_pilot);

/// W = R_hh * (R_hh + (noise_var/es) I)^{-1}, applied to the LS estimate.
CMat lmmse_weights(const CMat& r_hh, double noise_var, double es);

/// Real embedding [Re -Im; Im Re] of a complex weight matrix.
RMat realize_weights(const CMat& w);

/// The linear channel-refinement layer: a single 2N x 2N real weight matrix,
/// no bias, no activation.  Initialized from the realized LMMSE weights.
struct CeNetParams {
  RMat w;
  int epochs_trained = 0;
  double train_snr_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;  // per-epoch training loss
};

CeNetParams ce_init_from_lmmse(const CMat& w_lmmse);

/// unstack(W * stack(h_ls)).
CVec ce_forward(const CeNetParams& params, const LsEstimate& ls);

/// Supervised pairs (stacked LS estimate, stacked true response).
struct CeDataset {
  std::vector<RVec> inputs, targets;
  std::size_t size() const { return inputs.size(); }
};

struct CeTrainConfig {
  AdamConfig adam;
  int epochs = 4;
  int batch_size = 50;
  double val_fraction = 0.1;  // held-out tail used for best-checkpoint selection
  std::uint64_t shuffle_seed = 1;
};

/// Adam on loss = mean_batch ||W x - t||^2 with the analytic gradient
/// (2/B) sum (W x - t) x^T.  Returns the weights with the best held-out loss
/// seen over the epochs (the initialization included).
CeNetParams ce_train(const CeNetParams& init, const CeDataset& data, const CeTrainConfig& cfg);

/// Mean ||W x - t||^2 over a dataset slice.
double ce_loss(const RMat& w, const CeDataset& data, std::size_t begin, std::size_t end);

/// Analytic gradient of ce_loss in W: (2/B) sum (W x - t) x^T.
RMat ce_grad(const RMat& w, const CeDataset& data, std::size_t begin, std::size_t end);

/// Simulates pilot receptions over fresh channels at one SNR and collects
/// (LS estimate, true frequency response) training pairs.  Every pilot sees
/// ISI from a random previous data block, as in steady-state reception.
CeDataset make_ce_dataset(int n_subcarriers, const PowerDelayProfile& pdp,
                          const Constellation& data_constellation, const CVec& u_pilot,
                          double snr_db, std::size_t count, std::uint64_t seed);

}  // namespace dloamp
