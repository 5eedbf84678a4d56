// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dloamp/adam.hpp"
#include "dloamp/ce_net.hpp"
#include "dloamp/oamp.hpp"

namespace dloamp {

/// The 2L trainable scalars of the unfolded detector, one (lambda, gamma)
/// pair per layer.  lambda scales the linear-estimate correction, gamma the
/// denoiser-variance bookkeeping.
struct OampNetParams {
  RVec lambda, gamma;
  double train_snr_db = 0.0;
  std::uint64_t seed = 0;
  int layers() const { return static_cast<int>(lambda.size()); }

  static OampNetParams identity(int layers);  // lambda = gamma = 1: classic OAMP
  RVec flatten() const;                       // [lambda; gamma]
  static OampNetParams from_flat(const RVec& theta);
};

/// Unfolded forward pass; reduces to oamp_detect when all parameters are 1.
RVec net_forward(const SvdModel& model, const OampNetParams& params, const OampConfig& cfg);
RVec net_forward(const DetectionModel& model, const OampNetParams& params,
                 const OampConfig& cfg);

/// One supervised detection problem.
struct NetSample {
  SvdModel model;
  RVec u_true;                        // stacked transmitted symbols
  std::vector<std::uint8_t> data_bits;
};

/// Mean over the batch of ||forward - u_true||^2.
double net_loss(const OampNetParams& params, const std::vector<NetSample>& batch,
                const OampConfig& cfg);

/// Fraction of payload bits decided wrongly over the batch.
double net_ber(const OampNetParams& params, const std::vector<NetSample>& batch,
               const OampConfig& cfg, const Constellation& c);

/// Central finite differences of an arbitrary scalar function; exact for
/// quadratics up to rounding.
RVec fd_gradient(const std::function<double(const RVec&)>& f, const RVec& theta, double step);

/// Central finite differences over the 2L scalars; ordering matches flatten().
RVec net_grad_fd(const OampNetParams& params, const std::vector<NetSample>& batch,
                 const OampConfig& cfg, double step = 1e-4);

/// Everything needed to simulate one link sample end to end.
struct LinkSetup {
  int n_subcarriers = 64;
  Constellation constellation;
  CVec u_pilot;
  PowerDelayProfile pdp;
  OampConfig oamp;
  bool use_true_csi = false;  // ablation: bypass the CE front end
};

/// Fresh channel + frame + reception + CE front end at one SNR.
NetSample generate_net_sample(const LinkSetup& link, const CeNetParams& ce, double snr_db,
                              std::uint64_t sample_seed);

struct OampNetTrainConfig {
  int epochs = 500;
  int batch_size = 100;
  int dev_samples = 256;
  int confirm_samples = 0;  // 0: four times dev_samples
  double train_snr_db = 20.0;
  double fd_step = 1e-4;
  AdamConfig adam;
  int patience = 0;  // epochs without dev improvement before stopping; 0 = off
  double divergence_factor = 1e3;
  std::uint64_t seed = 1;
};

struct TrainEpochRecord {
  int epoch = 0;
  double train_loss = 0.0, dev_loss = 0.0, dev_ber = 0.0;
};

struct OampNetTrainResult {
  OampNetParams params;  // winner of the confirmation stage
  std::vector<TrainEpochRecord> history;
  // metrics on the held-out confirmation set; the initialization is always a
  // candidate there, so best_dev_ber <= init_dev_ber
  double init_dev_ber = 0.0, best_dev_ber = 0.0;
  double init_dev_loss = 0.0, best_dev_loss = 0.0;
};

/// Adam over the 2L scalars with finite-difference gradients.  Each epoch
/// draws a fresh batch through the frozen CE front end and is scored on a
/// fixed development set.  A final confirmation stage re-scores the
/// initialization, the best development checkpoint and the last-epoch
/// parameters on a larger fresh set and returns the winner, so a lucky
/// development draw cannot promote a checkpoint that does not generalize.
OampNetTrainResult train_oamp_net(const OampNetParams& init, const OampNetTrainConfig& cfg,
                                  const CeNetParams& ce, const LinkSetup& link);

}  // namespace dloamp
