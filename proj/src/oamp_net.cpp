// SPDX-License-Identifier: Apache-2.0
#include "dloamp/oamp_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dloamp/harness_seed.hpp"

namespace dloamp {

OampNetParams OampNetParams::identity(int layers) {
  OampNetParams p;
  p.lambda = RVec::Ones(layers);
  p.gamma = RVec::Ones(layers);
  return p;
}

RVec OampNetParams::flatten() const {
  RVec theta(2 * lambda.size());
  theta.head(lambda.size()) = lambda;
  theta.tail(gamma.size()) = gamma;
  return theta;
}

OampNetParams OampNetParams::from_flat(const RVec& theta) {
  OampNetParams p;
  const Eigen::Index half = theta.size() / 2;
  p.lambda = theta.head(half);
  p.gamma = theta.tail(half);
  return p;
}

RVec net_forward(const SvdModel& model, const OampNetParams& params, const OampConfig& cfg) {
  if (params.layers() != cfg.iterations)
    throw std::invalid_argument("net_forward: layer count does not match iterations");
  if (cfg.alphabet.empty()) throw std::invalid_argument("net_forward: empty alphabet");
  const Eigen::Index dim = model.dim();
  const double n_complex = static_cast<double>(dim) / 2.0;

  RVec u = RVec::Zero(dim);
  double v_sm = cfg.initial_v_sq;

  for (int l = 0; l < cfg.iterations; ++l) {
    const double lam = params.lambda(l);
    const double gam = params.gamma(l);

    const RVec z = model.y - model.u_basis * model.s.cwiseProduct(model.v_basis.transpose() * u).eval();
    const double v_sq =
        std::max((z.squaredNorm() - n_complex * model.noise_var) / model.tr_hth, cfg.epsilon);
    v_sm = (1.0 - cfg.beta) * v_sm + cfg.beta * v_sq;

    const auto mats = detail::iteration_mats(model, v_sm);
    const RVec r =
        u + lam * (model.v_basis * mats.d.cwiseProduct(model.u_basis.transpose() * z).eval());

    // C = I - gamma W H replaces B in the variance bookkeeping
    double tr_cc = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double e = 1.0 - gam * mats.ds(i);
      tr_cc += e * e;
    }
    const double tau_sq = std::max(
        tr_cc * v_sm / static_cast<double>(dim) +
            gam * gam * mats.tr_ww * model.noise_var / (2.0 * static_cast<double>(dim)),
        cfg.epsilon);

    u = posterior_mean(r, tau_sq, cfg.alphabet);
  }
  return u;
}

RVec net_forward(const DetectionModel& model, const OampNetParams& params,
                 const OampConfig& cfg) {
  return net_forward(factorize(model), params, cfg);
}

double net_loss(const OampNetParams& params, const std::vector<NetSample>& batch,
                const OampConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("net_loss: empty batch");
  double acc = 0.0;
  for (const NetSample& s : batch) {
    const RVec u = net_forward(s.model, params, cfg);
    if (!u.allFinite()) throw std::runtime_error("net_loss: non-finite forward pass");
    acc += (u - s.u_true).squaredNorm();
  }
  return acc / static_cast<double>(batch.size());
}

double net_ber(const OampNetParams& params, const std::vector<NetSample>& batch,
               const OampConfig& cfg, const Constellation& c) {
  long errs = 0, bits = 0;
  for (const NetSample& s : batch) {
    const auto decided = qam_hard_demod(unstack_vec(net_forward(s.model, params, cfg)), c);
    errs += count_bit_errors(decided, s.data_bits);
    bits += static_cast<long>(s.data_bits.size());
  }
  return static_cast<double>(errs) / static_cast<double>(bits);
}

RVec fd_gradient(const std::function<double(const RVec&)>& f, const RVec& theta, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  RVec grad(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    RVec up = theta, dn = theta;
    up(i) += step;
    dn(i) -= step;
    grad(i) = (f(up) - f(dn)) / (2.0 * step);
  }
  return grad;
}

RVec net_grad_fd(const OampNetParams& params, const std::vector<NetSample>& batch,
                 const OampConfig& cfg, double step) {
  return fd_gradient(
      [&](const RVec& theta) { return net_loss(OampNetParams::from_flat(theta), batch, cfg); },
      params.flatten(), step);
}

NetSample generate_net_sample(const LinkSetup& link, const CeNetParams& ce, double snr_db,
                              std::uint64_t sample_seed) {
  const int n = link.n_subcarriers;
  const std::size_t bits_per_frame =
      static_cast<std::size_t>(n) * static_cast<std::size_t>(link.constellation.bits_per_symbol);
  const ChannelRealization ch = draw_taps(link.pdp, seed::combine(sample_seed, 1));
  const auto bits = random_bits(bits_per_frame, seed::combine(sample_seed, 2));
  const OfdmFrame frame = make_frame(bits, link.constellation, link.u_pilot);
  const auto prev_bits = random_bits(bits_per_frame, seed::combine(sample_seed, 3));
  const CVec q_prev = ifft_unitary(qam_modulate(prev_bits, link.constellation));
  const RxFrame rx = transmit_cp_free(frame, ch, snr_db, seed::combine(sample_seed, 4), &q_prev);

  CVec h_freq;
  if (link.use_true_csi) {
    h_freq = freq_response(ch, n);
  } else {
    const LsEstimate ls = ls_estimate(fft_unitary(rx.y_pilot), link.u_pilot);
    h_freq = ce_forward(ce, ls);
  }
  NetSample sample;
  sample.model = prepare_detection(rx, h_freq, link.pdp.taps());
  sample.u_true = stack_vec(frame.u_data);
  sample.data_bits = bits;
  return sample;
}

OampNetTrainResult train_oamp_net(const OampNetParams& init, const OampNetTrainConfig& cfg,
                                  const CeNetParams& ce, const LinkSetup& link) {
  if (init.layers() != link.oamp.iterations)
    throw std::invalid_argument("train_oamp_net: layer count does not match iterations");

  auto make_batch = [&](std::uint64_t tag, int count) {
    std::vector<NetSample> batch;
    batch.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
      batch.push_back(generate_net_sample(
          link, ce, cfg.train_snr_db,
          seed::combine(seed::combine(cfg.seed, tag), static_cast<std::uint64_t>(i))));
    return batch;
  };

  const std::vector<NetSample> dev = make_batch(0xdef, cfg.dev_samples);

  OampNetTrainResult res;
  OampNetParams cur = init;
  cur.train_snr_db = cfg.train_snr_db;
  cur.seed = cfg.seed;

  OampNetParams best = cur;
  double best_ber = net_ber(cur, dev, link.oamp, link.constellation);
  double best_loss = net_loss(cur, dev, link.oamp);
  int since_improvement = 0;
  double initial_loss = -1.0;

  AdamState adam(2 * init.layers(), cfg.adam);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<NetSample> batch =
        make_batch(1000 + static_cast<std::uint64_t>(epoch), cfg.batch_size);
    const double train_loss = net_loss(cur, batch, link.oamp);
    if (initial_loss < 0.0) initial_loss = train_loss;
    if (train_loss > cfg.divergence_factor * initial_loss)
      throw std::runtime_error("train_oamp_net: diverged at epoch " + std::to_string(epoch));

    const RVec grad = net_grad_fd(cur, batch, link.oamp, cfg.fd_step);
    cur = OampNetParams::from_flat(adam_step(adam, cur.flatten(), grad));
    cur.train_snr_db = cfg.train_snr_db;
    cur.seed = cfg.seed;

    const double dev_loss = net_loss(cur, dev, link.oamp);
    const double dev_ber = net_ber(cur, dev, link.oamp, link.constellation);
    res.history.push_back({epoch, train_loss, dev_loss, dev_ber});

    if (dev_ber < best_ber || (dev_ber == best_ber && dev_loss < best_loss)) {
      best = cur;
      best_ber = dev_ber;
      best_loss = dev_loss;
      since_improvement = 0;
    } else if (cfg.patience > 0 && ++since_improvement >= cfg.patience) {
      break;
    }
  }

  // confirmation stage: re-score the candidates on a larger fresh set so the
  // winner is not an artifact of development-set noise
  const int confirm_count =
      cfg.confirm_samples > 0 ? cfg.confirm_samples : 4 * cfg.dev_samples;
  const std::vector<NetSample> confirm = make_batch(0xc0f1, confirm_count);
  OampNetParams init_tagged = init;
  init_tagged.train_snr_db = cfg.train_snr_db;
  init_tagged.seed = cfg.seed;
  const OampNetParams* candidates[] = {&init_tagged, &best, &cur};
  const OampNetParams* winner = nullptr;
  double winner_ber = 0.0, winner_loss = 0.0;
  for (const OampNetParams* cand : candidates) {
    const double ber = net_ber(*cand, confirm, link.oamp, link.constellation);
    const double loss = net_loss(*cand, confirm, link.oamp);
    if (cand == &init_tagged) {
      res.init_dev_ber = ber;
      res.init_dev_loss = loss;
    }
    if (!winner || ber < winner_ber || (ber == winner_ber && loss < winner_loss)) {
      winner = cand;
      winner_ber = ber;
      winner_loss = loss;
    }
  }
  res.params = *winner;
  res.best_dev_ber = winner_ber;
  res.best_dev_loss = winner_loss;
  return res;
}

}  // namespace dloamp
