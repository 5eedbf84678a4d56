// SPDX-License-Identifier: Apache-2.0
#include "dloamp/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dloamp/checkpoint.hpp"
#include "dloamp/harness_seed.hpp"

namespace dloamp {

ReceiverKind receiver_from_name(const std::string& name) {
  if (name == "ls-mmse") return ReceiverKind::LsMmse;
  if (name == "lmmse-mmse") return ReceiverKind::LmmseMmse;
  if (name == "isi-mmse") return ReceiverKind::IsiCancelMmse;
  if (name == "oamp") return ReceiverKind::CeOamp;
  if (name == "dl-oamp") return ReceiverKind::DlOamp;
  if (name == "cp-mmse") return ReceiverKind::CpMmse;
  if (name == "cp-ml-csi") return ReceiverKind::CpMlCsi;
  throw std::runtime_error("unknown receiver '" + name + "'");
}

std::string receiver_name(ReceiverKind kind) {
  switch (kind) {
    case ReceiverKind::LsMmse: return "ls-mmse";
    case ReceiverKind::LmmseMmse: return "lmmse-mmse";
    case ReceiverKind::IsiCancelMmse: return "isi-mmse";
    case ReceiverKind::CeOamp: return "oamp";
    case ReceiverKind::DlOamp: return "dl-oamp";
    case ReceiverKind::CpMmse: return "cp-mmse";
    case ReceiverKind::CpMlCsi: return "cp-ml-csi";
  }
  throw std::logic_error("receiver_name: bad kind");
}

SimConfig sim_config_from(const ConfigMap& cfg) {
  SimConfig sim;
  sim.n = static_cast<int>(cfg.get_long("sim.n", sim.n));
  sim.qam = static_cast<int>(cfg.get_long("sim.constellation", sim.qam));
  sim.snr_grid = cfg.get_double_list("sim.snr_db", sim.snr_grid);
  sim.taps = static_cast<int>(cfg.get_long("channel.taps", sim.taps));
  sim.decay = cfg.get_double("channel.decay", sim.decay);
  sim.target_errors = cfg.get_long("sim.target_bit_errors", sim.target_errors);
  sim.frame_cap = cfg.get_long("sim.frame_cap", sim.frame_cap);
  sim.receivers = cfg.get_string_list("sim.receivers", sim.receivers);
  sim.seed = cfg.get_u64("sim.seed", sim.seed);
  sim.oamp_iterations = static_cast<int>(cfg.get_long("oamp.iterations", sim.oamp_iterations));
  sim.oamp_beta = cfg.get_double("oamp.beta", sim.oamp_beta);
  sim.oamp_epsilon = cfg.get_double("oamp.epsilon", sim.oamp_epsilon);
  sim.oamp_initial_v_sq = cfg.get_double("oamp.initial_v_sq", sim.oamp_initial_v_sq);
  sim.ce_checkpoint = cfg.get_string("checkpoints.ce", sim.ce_checkpoint);
  sim.oampnet_checkpoint = cfg.get_string("checkpoints.oamp_net", sim.oampnet_checkpoint);
  sim.out_csv = cfg.get_string("out.csv", sim.out_csv);
  sim.measured_wall_seconds = cfg.get_bool("out.measured_wall_seconds", sim.measured_wall_seconds);
  sim.dump_trajectory = cfg.get_string("out.dump_trajectory", sim.dump_trajectory);
  return sim;
}

void validate(const SimConfig& cfg) {
  if (cfg.n < 2) throw std::runtime_error("config: sim.n must be >= 2");
  if (cfg.snr_grid.empty()) throw std::runtime_error("config: sim.snr_db must be nonempty");
  if (cfg.target_errors < 100)
    throw std::runtime_error("config: sim.target_bit_errors must be >= 100");
  if (cfg.frame_cap < 1) throw std::runtime_error("config: sim.frame_cap must be >= 1");
  if (cfg.taps < 1 || cfg.taps > cfg.n)
    throw std::runtime_error("config: channel.taps must be in [1, sim.n]");
  if (cfg.receivers.empty()) throw std::runtime_error("config: sim.receivers must be nonempty");
  for (const auto& r : cfg.receivers) receiver_from_name(r);
  make_constellation(cfg.qam);  // rejects unsupported orders
}

double expected_signal_power(const PowerDelayProfile& pdp, int n_subcarriers) {
  double moment = 0.0;
  for (int l = 0; l < pdp.taps(); ++l) moment += l * pdp.tap_powers[static_cast<size_t>(l)];
  return (n_subcarriers - moment) / n_subcarriers;
}

OampConfig oamp_config_from(const SimConfig& cfg, const Constellation& c) {
  OampConfig oamp;
  oamp.iterations = cfg.oamp_iterations;
  oamp.beta = cfg.oamp_beta;
  oamp.epsilon = cfg.oamp_epsilon;
  oamp.initial_v_sq = cfg.oamp_initial_v_sq;
  oamp.alphabet = c.real_levels;
  return oamp;
}

LinkSetup link_setup_from(const SimConfig& cfg) {
  LinkSetup link;
  link.n_subcarriers = cfg.n;
  link.constellation = make_constellation(cfg.qam);
  link.u_pilot = make_pilot_symbol(cfg.n);
  link.pdp = exp_pdp(cfg.taps, cfg.decay);
  link.oamp = oamp_config_from(cfg, link.constellation);
  return link;
}

namespace {

struct SweepContext {
  SimConfig cfg;
  Constellation constellation;
  CVec u_pilot;
  PowerDelayProfile pdp;
  CMat r_hh;
  OampConfig oamp;
  std::optional<CeNetParams> ce_fixed;       // loaded checkpoint, if any
  std::optional<OampNetParams> net_params;   // required by dl-oamp
};

struct PointAccumulator {
  long bits = 0, errors = 0, frames = 0;
};

void dump_trajectory_file(const std::string& path, const std::string& rx_name, double snr_db,
                          const OampResult& result) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write trajectory dump " + path);
  out << "# receiver " << rx_name << " snr_db " << snr_db << " frame 0\n";
  out << "# iter v_sq v_sq_smoothed tau_sq\n";
  char buf[96];
  for (size_t i = 0; i < result.trajectory.size(); ++i) {
    const auto& st = result.trajectory[i];
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %.17g", i, st.v_sq, st.v_sq_smoothed,
                  st.tau_sq);
    out << buf << "\n";
    out << "r";
    for (Eigen::Index k = 0; k < st.r.size(); ++k) {
      std::snprintf(buf, sizeof(buf), " %.17g", st.r(k));
      out << buf;
    }
    out << "\nu_hat";
    for (Eigen::Index k = 0; k < st.u_hat.size(); ++k) {
      std::snprintf(buf, sizeof(buf), " %.17g", st.u_hat(k));
      out << buf;
    }
    out << "\n";
  }
}

BerRecord run_point(const SweepContext& ctx, ReceiverKind kind, double snr_db) {
  const auto& cfg = ctx.cfg;
  const std::string name = receiver_name(kind);
  const std::size_t bits_per_frame = static_cast<std::size_t>(cfg.n) *
                                     static_cast<std::size_t>(ctx.constellation.bits_per_symbol);
  const std::uint64_t point_seed = seed::combine(
      seed::combine(cfg.seed, seed::hash_string(name)),
      static_cast<std::uint64_t>(std::llround(snr_db * 1000.0)));

  // per-point estimator weights from the ensemble noise level at this SNR
  const double noise_var_mean =
      expected_signal_power(ctx.pdp, cfg.n) * std::pow(10.0, -snr_db / 10.0);
  std::optional<CMat> w_lmmse;
  std::optional<CeNetParams> ce_local;
  const CeNetParams* ce = nullptr;
  if (kind == ReceiverKind::LmmseMmse || kind == ReceiverKind::CpMmse ||
      kind == ReceiverKind::IsiCancelMmse || kind == ReceiverKind::CeOamp ||
      kind == ReceiverKind::DlOamp) {
    if (ctx.ce_fixed &&
        (kind == ReceiverKind::IsiCancelMmse || kind == ReceiverKind::CeOamp ||
         kind == ReceiverKind::DlOamp)) {
      ce = &*ctx.ce_fixed;
    } else {
      w_lmmse = lmmse_weights(ctx.r_hh, noise_var_mean, 1.0);
      if (kind != ReceiverKind::LmmseMmse && kind != ReceiverKind::CpMmse) {
        ce_local = ce_init_from_lmmse(*w_lmmse);
        ce = &*ce_local;
      }
    }
  }

  PointAccumulator acc;
  std::optional<CVec> q_prev;  // previous frame's data block; empty for frame 0
  const auto t0 = std::chrono::steady_clock::now();

  for (long frame_idx = 0; frame_idx < cfg.frame_cap; ++frame_idx) {
    const std::uint64_t fseed = seed::combine(point_seed, static_cast<std::uint64_t>(frame_idx));
    const ChannelRealization ch = draw_taps(ctx.pdp, seed::combine(fseed, 1));
    const auto bits = random_bits(bits_per_frame, seed::combine(fseed, 2));
    const OfdmFrame frame = make_frame(bits, ctx.constellation, ctx.u_pilot);
    const std::uint64_t noise_seed = seed::combine(fseed, 4);

    std::vector<std::uint8_t> decided;
    if (kind == ReceiverKind::CpMmse || kind == ReceiverKind::CpMlCsi) {
      const CpEstimator est =
          kind == ReceiverKind::CpMmse ? CpEstimator::Lmmse : CpEstimator::Perfect;
      const CpDetector det = kind == ReceiverKind::CpMmse ? CpDetector::Mmse : CpDetector::Ml;
      decided = detect_with_cp(frame, ch, snr_db, est, det, ctx.constellation, noise_seed,
                               &ctx.r_hh);
    } else {
      const RxFrame rx =
          transmit_cp_free(frame, ch, snr_db, noise_seed, q_prev ? &*q_prev : nullptr);
      const LsEstimate ls = ls_estimate(fft_unitary(rx.y_pilot), ctx.u_pilot);
      switch (kind) {
        case ReceiverKind::LsMmse: {
          const CVec x_hat =
              mmse_equalize_per_subcarrier(fft_unitary(rx.y_data), ls.h_ls, rx.noise_var);
          decided = qam_hard_demod(x_hat, ctx.constellation);
          break;
        }
        case ReceiverKind::LmmseMmse: {
          const CVec g = (*w_lmmse) * ls.h_ls;
          const CVec x_hat =
              mmse_equalize_per_subcarrier(fft_unitary(rx.y_data), g, rx.noise_var);
          decided = qam_hard_demod(x_hat, ctx.constellation);
          break;
        }
        case ReceiverKind::IsiCancelMmse: {
          const CVec g = ce_forward(*ce, ls);
          decided = isi_cancel_mmse_detect(rx, g, ctx.pdp.taps(), ctx.constellation);
          break;
        }
        case ReceiverKind::CeOamp: {
          const CVec g = ce_forward(*ce, ls);
          const SvdModel model = prepare_detection(rx, g, ctx.pdp.taps());
          const OampResult res = oamp_detect(model, ctx.oamp);
          if (frame_idx == 0 && !cfg.dump_trajectory.empty())
            dump_trajectory_file(cfg.dump_trajectory, name, snr_db, res);
          decided = qam_hard_demod(unstack_vec(res.u_hat), ctx.constellation);
          break;
        }
        case ReceiverKind::DlOamp: {
          const CVec g = ce_forward(*ce, ls);
          const SvdModel model = prepare_detection(rx, g, ctx.pdp.taps());
          const RVec u = net_forward(model, *ctx.net_params, ctx.oamp);
          decided = qam_hard_demod(unstack_vec(u), ctx.constellation);
          break;
        }
        default:
          throw std::logic_error("run_point: unhandled receiver");
      }
      q_prev = frame.q_data;
    }

    acc.errors += count_bit_errors(decided, bits);
    acc.bits += static_cast<long>(bits_per_frame);
    ++acc.frames;
    if (acc.errors >= cfg.target_errors) break;
  }

  const auto t1 = std::chrono::steady_clock::now();
  BerRecord rec;
  rec.receiver = name;
  rec.snr_db = snr_db;
  rec.bits_sent = acc.bits;
  rec.bit_errors = acc.errors;
  rec.ber = static_cast<double>(acc.errors) / static_cast<double>(acc.bits);
  rec.frames = acc.frames;
  rec.wall_seconds =
      cfg.measured_wall_seconds ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
  rec.seed = point_seed;
  rec.reached_target = acc.errors >= cfg.target_errors;
  return rec;
}

}  // namespace

std::vector<BerRecord> run_ber_sweep(const SimConfig& cfg,
                                     const std::function<void(const BerRecord&)>& on_point) {
  validate(cfg);
  SweepContext ctx;
  ctx.cfg = cfg;
  ctx.constellation = make_constellation(cfg.qam);
  ctx.u_pilot = make_pilot_symbol(cfg.n);
  ctx.pdp = exp_pdp(cfg.taps, cfg.decay);
  ctx.r_hh = channel_correlation(ctx.pdp, cfg.n);
  ctx.oamp = oamp_config_from(cfg, ctx.constellation);

  if (!cfg.ce_checkpoint.empty())
    ctx.ce_fixed = load_ce_checkpoint(cfg.ce_checkpoint, cfg.n);

  bool wants_dloamp = false;
  for (const auto& r : cfg.receivers)
    if (receiver_from_name(r) == ReceiverKind::DlOamp) wants_dloamp = true;
  if (wants_dloamp) {
    if (cfg.oampnet_checkpoint.empty())
      throw std::runtime_error(
          "receiver dl-oamp requires checkpoints.oamp_net (missing checkpoint)");
    ctx.net_params = load_oamp_net_checkpoint(cfg.oampnet_checkpoint, cfg.oamp_iterations);
  }

  std::vector<BerRecord> records;
  for (const auto& rname : cfg.receivers) {
    const ReceiverKind kind = receiver_from_name(rname);
    for (double snr : cfg.snr_grid) {
      BerRecord rec = run_point(ctx, kind, snr);
      if (on_point) on_point(rec);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit_csv(const std::vector<BerRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw std::runtime_error("emit_csv: cannot write " + path);
  out << "receiver,snr_db,bits_sent,bit_errors,ber,frames,wall_seconds,seed\n";
  for (const auto& r : records) {
    out << r.receiver << "," << fmt17(r.snr_db) << "," << r.bits_sent << "," << r.bit_errors
        << "," << fmt17(r.ber) << "," << r.frames << "," << fmt17(r.wall_seconds) << ","
        << r.seed << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failure on " + path);
}

namespace {

struct SelfTest {
  const char* name;
  bool (*fn)();
};

bool st_fft_unitary() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int n : {4, 8, 64, 6}) {
    CVec x(n);
    for (int i = 0; i < n; ++i) x(i) = Cplx(g(rng), g(rng));
    if (std::abs(fft_unitary(x).norm() - x.norm()) > 1e-12) return false;
    if ((ifft_unitary(fft_unitary(x)) - x).norm() > 1e-12) return false;
  }
  return true;
}

bool st_embedding() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  CMat a(3, 3), b(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      a(i, j) = Cplx(g(rng), g(rng));
      b(i, j) = Cplx(g(rng), g(rng));
    }
  return (complex_to_real_mat(a * b) - complex_to_real_mat(a) * complex_to_real_mat(b)).norm() <
         1e-12;
}

bool st_circulant_diag() {
  const PowerDelayProfile pdp = exp_pdp(4, 2.0);
  const ChannelRealization ch = draw_taps(pdp, 11);
  const int n = 8;
  const CMat f = dft_matrix_unitary(n);
  const CMat lhs = f * build_cyclic_H(ch, n) * f.adjoint();
  const CVec g = freq_response(ch, n);
  return (lhs - CMat(g.asDiagonal())).norm() < 1e-10;
}

bool st_toeplitz_structure() {
  const PowerDelayProfile pdp = exp_pdp(4, 2.0);
  const ChannelRealization ch = draw_taps(pdp, 12);
  const int n = 8;
  const CMat h1 = build_cyclic_H(ch, n) - build_cutoff_A(ch, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int lag = r - c;
      const Cplx want = (lag >= 0 && lag < ch.tap_count()) ? ch.taps(lag) : Cplx(0, 0);
      if (std::abs(h1(r, c) - want) > 1e-14) return false;
    }
  return true;
}

bool st_qam_round_trip() {
  for (int order : {4, 16, 64}) {
    const Constellation c = make_constellation(order);
    const auto bits = random_bits(static_cast<size_t>(8 * c.bits_per_symbol), 21);
    if (qam_hard_demod(qam_modulate(bits, c), c) != bits) return false;
  }
  return true;
}

bool st_posterior_tanh() {
  const std::vector<double> pm1 = {-1.0, 1.0};
  for (double r : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
    for (double t2 : {0.05, 0.5, 2.0}) {
      RVec rv(1);
      rv(0) = r;
      const double got = posterior_mean(rv, t2, pm1)(0);
      if (std::abs(got - std::tanh(r / t2)) > 1e-12) return false;
    }
  }
  return true;
}

bool st_reduction_identity() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  const Constellation c = make_constellation(16);
  OampConfig cfg;
  cfg.iterations = 5;
  cfg.alphabet = c.real_levels;
  for (int trial = 0; trial < 3; ++trial) {
    const int dim = 8;
    DetectionModel m;
    m.h.resize(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m.h(i, j) = g(rng) / 2.0;
    m.y.resize(dim);
    for (int i = 0; i < dim; ++i) m.y(i) = g(rng);
    m.noise_var = 0.05;
    const RVec classic = oamp_detect(m, cfg).u_hat;
    const RVec net = net_forward(m, OampNetParams::identity(cfg.iterations), cfg);
    if ((classic - net).norm() > 1e-10) return false;
  }
  return true;
}

bool st_taps_determinism() {
  const PowerDelayProfile pdp = exp_pdp(8, 2.0);
  const ChannelRealization a = draw_taps(pdp, 99), b = draw_taps(pdp, 99);
  const ChannelRealization c = draw_taps(pdp, 100);
  return (a.taps - b.taps).norm() == 0.0 && (a.taps - c.taps).norm() > 0.0;
}

bool st_oamp_w_trace() {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  const int dim = 8;
  RMat h(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) h(i, j) = g(rng);
  const auto [w, b] = oamp_w(h, 0.7, 0.3);
  return std::abs((w * h).trace() - dim) < 1e-8 * dim &&
         (b - (RMat::Identity(dim, dim) - w * h)).norm() < 1e-12;
}

const SelfTest kSelfTests[] = {
    {"fft unitarity and round trip", st_fft_unitary},
    {"real embedding homomorphism", st_embedding},
    {"circulant diagonalized by the DFT", st_circulant_diag},
    {"H - A is the convolution Toeplitz", st_toeplitz_structure},
    {"QAM modulate/demod round trip", st_qam_round_trip},
    {"posterior mean tanh closed form", st_posterior_tanh},
    {"unfolded net reduces to classic OAMP", st_reduction_identity},
    {"seeded taps deterministic", st_taps_determinism},
    {"de-correlation trace normalization", st_oamp_w_trace},
};

}  // namespace

int run_selftest() {
  int failures = 0;
  for (const auto& t : kSelfTests) {
    bool ok = false;
    try {
      ok = t.fn();
    } catch (const std::exception& e) {
      std::printf("selftest: %-40s FAIL (%s)\n", t.name, e.what());
      ++failures;
      continue;
    }
    std::printf("selftest: %-40s %s\n", t.name, ok ? "ok" : "FAIL");
    if (!ok) ++failures;
  }
  return failures;
}

std::vector<BerRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty file " + path);
  if (line != "receiver,snr_db,bits_sent,bit_errors,ber,frames,wall_seconds,seed")
    throw std::runtime_error("parse_csv: unexpected header in " + path);
  std::vector<BerRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    BerRecord r;
    auto next = [&]() {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("parse_csv: short row in " + path);
      return tok;
    };
    r.receiver = next();
    r.snr_db = std::stod(next());
    r.bits_sent = std::stol(next());
    r.bit_errors = std::stol(next());
    r.ber = std::stod(next());
    r.frames = std::stol(next());
    r.wall_seconds = std::stod(next());
    r.seed = std::stoull(next());
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace dloamp
