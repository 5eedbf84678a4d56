// SPDX-License-Identifier: Apache-2.0
#include "dloamp/ce_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dloamp/harness_seed.hpp"

namespace dloamp {

LsEstimate ls_estimate(const CVec& y_pilot_freq, const CVec& x_pilot) {
  if (y_pilot_freq.size() != x_pilot.size())
    throw std::invalid_argument("ls_estimate: length mismatch");
  LsEstimate out;
  out.h_ls.resize(x_pilot.size());
  for (Eigen::Index n = 0; n < x_pilot.size(); ++n) {
    if (std::abs(x_pilot(n)) == 0.0)
      throw std::invalid_argument("ls_estimate: zero pilot symbol on a subcarrier");
    out.h_ls(n) = y_pilot_freq(n) / x_pilot(n);
  }
  return out;
}

CMat lmmse_weights(const CMat& r_hh, double noise_var, double es) {
  if (noise_var < 0.0) throw std::invalid_argument("lmmse_weights: negative noise variance");
  if (!(es > 0.0)) throw std::invalid_argument("lmmse_weights: Es must be positive");
  CMat reg = r_hh;
  reg.diagonal().array() += Cplx(noise_var / es, 0.0);
  // W = R (R + c I)^{-1}; solve the adjoint system so the pivoted LU runs once.
  Eigen::PartialPivLU<CMat> lu(reg.adjoint());
  CMat w = lu.solve(r_hh.adjoint()).adjoint();
  if (!w.allFinite()) throw std::runtime_error("lmmse_weights: singular regularized matrix");
  return w;
}

RMat realize_weights(const CMat& w) { return complex_to_real_mat(w); }

CeNetParams ce_init_from_lmmse(const CMat& w_lmmse) {
  CeNetParams p;
  p.w = realize_weights(w_lmmse);
  return p;
}

CVec ce_forward(const CeNetParams& params, const LsEstimate& ls) {
  if (params.w.cols() != 2 * ls.h_ls.size())
    throw std::invalid_argument("ce_forward: dimension mismatch");
  return unstack_vec(params.w * stack_vec(ls.h_ls));
}

double ce_loss(const RMat& w, const CeDataset& data, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i)
    acc += (w * data.inputs[i] - data.targets[i]).squaredNorm();
  return acc / static_cast<double>(end - begin);
}

RMat ce_grad(const RMat& w, const CeDataset& data, std::size_t begin, std::size_t end) {
  RMat grad = RMat::Zero(w.rows(), w.cols());
  for (std::size_t i = begin; i < end; ++i)
    grad += (w * data.inputs[i] - data.targets[i]) * data.inputs[i].transpose();
  return grad * (2.0 / static_cast<double>(end - begin));
}

CeNetParams ce_train(const CeNetParams& init, const CeDataset& data, const CeTrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("ce_train: empty dataset");
  const std::size_t n_val =
      std::min(data.size() - 1, static_cast<std::size_t>(cfg.val_fraction * data.size()));
  const std::size_t n_train = data.size() - n_val;
  const bool has_val = n_val > 0;

  CeNetParams out = init;
  const Eigen::Index dim = init.w.rows();
  AdamState adam(dim * init.w.cols(), cfg.adam);

  RMat w = init.w;
  RMat best_w = w;
  double best_val = has_val ? ce_loss(w, data, n_train, data.size()) : 0.0;

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(cfg.shuffle_seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
      const Eigen::Index bsz = static_cast<Eigen::Index>(stop - start);
      RMat x(dim, bsz), t(dim, bsz);
      for (Eigen::Index k = 0; k < bsz; ++k) {
        x.col(k) = data.inputs[order[start + static_cast<std::size_t>(k)]];
        t.col(k) = data.targets[order[start + static_cast<std::size_t>(k)]];
      }
      const RMat resid = w * x - t;
      const double loss = resid.squaredNorm() / static_cast<double>(bsz);
      if (!std::isfinite(loss))
        throw std::runtime_error("ce_train: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss;
      ++n_batches;
      const RMat grad = (2.0 / static_cast<double>(bsz)) * resid * x.transpose();
      const Eigen::Map<const RVec> wflat(w.data(), w.size());
      const Eigen::Map<const RVec> gflat(grad.data(), grad.size());
      const RVec updated = adam_step(adam, wflat, gflat);
      w = Eigen::Map<const RMat>(updated.data(), w.rows(), w.cols());
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(n_batches));
    if (has_val) {
      const double val = ce_loss(w, data, n_train, data.size());
      if (val < best_val) {
        best_val = val;
        best_w = w;
      }
    } else {
      best_w = w;
    }
  }
  out.w = best_w;
  out.epochs_trained = init.epochs_trained + cfg.epochs;
  return out;
}

CeDataset make_ce_dataset(int n_subcarriers, const PowerDelayProfile& pdp,
                          const Constellation& data_constellation, const CVec& u_pilot,
                          double snr_db, std::size_t count, std::uint64_t seed) {
  CeDataset data;
  data.inputs.reserve(count);
  data.targets.reserve(count);
  const std::size_t bits_per_frame =
      static_cast<std::size_t>(n_subcarriers) * static_cast<std::size_t>(data_constellation.bits_per_symbol);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = seed::combine(seed, i);
    const ChannelRealization ch = draw_taps(pdp, seed::combine(s, 1));
    const auto bits = random_bits(bits_per_frame, seed::combine(s, 2));
    const OfdmFrame frame = make_frame(bits, data_constellation, u_pilot);
    // previous frame's data block, the pilot's interferer
    const auto prev_bits = random_bits(bits_per_frame, seed::combine(s, 3));
    const CVec q_prev = ifft_unitary(qam_modulate(prev_bits, data_constellation));
    const RxFrame rx = transmit_cp_free(frame, ch, snr_db, seed::combine(s, 4), &q_prev);
    const LsEstimate ls = ls_estimate(fft_unitary(rx.y_pilot), u_pilot);
    data.inputs.push_back(stack_vec(ls.h_ls));
    data.targets.push_back(stack_vec(freq_response(ch, n_subcarriers)));
  }
  return data;
}

}  // namespace dloamp
