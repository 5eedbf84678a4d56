// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion.  The heavy criteria
// (CE training, detector training plus BER comparison) run at desk scale and
// share their artifacts through a scratch directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "dloamp/checkpoint.hpp"
#include "dloamp/harness.hpp"
#include "dloamp/harness_seed.hpp"

using namespace dloamp;
namespace fs = std::filesystem;

namespace {

std::mt19937_64 rng(0xACCE97);

struct Shared {
  fs::path dir;
  std::string ce_ckpt, net_ckpt;
  double train_snr_db = 20.0;
};

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

RMat random_rmat(int r, int c) {
  std::normal_distribution<double> g;
  RMat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

RVec random_rvec(int n) {
  std::normal_distribution<double> g;
  RVec x(n);
  for (int i = 0; i < n; ++i) x(i) = g(rng);
  return x;
}

// --- 1: structural algebra --------------------------------------------------
bool criterion1() {
  const int n_values[] = {8, 64};
  const int l_values[] = {1, 4, 8};
  int count = 0;
  double worst_diag = 0.0;
  while (count < 200) {
    for (int n : n_values) {
      for (int taps : l_values) {
        if (count >= 200) break;
        const auto pdp = exp_pdp(taps, 2.0);
        const auto ch = draw_taps(pdp, 100000 + static_cast<std::uint64_t>(count));
        const CMat h = build_cyclic_H(ch, n);
        const CMat a = build_cutoff_A(ch, n);
        const CMat f = dft_matrix_unitary(n);
        const CVec g = freq_response(ch, n);
        const double diag_err = (f * h * f.adjoint() - CMat(g.asDiagonal())).norm();
        worst_diag = std::max(worst_diag, diag_err);
        if (diag_err >= 1e-10) return false;
        const CMat h1 = h - a;
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) {
            const int lag = r - c;
            const Cplx want = (lag >= 0 && lag < taps) ? ch.taps(lag) : Cplx(0, 0);
            if (h1(r, c) != want) return false;
          }
        ++count;
      }
    }
  }
  std::printf("        (200 channels, worst |F H F^H - diag(g)|_F = %.2e)\n", worst_diag);
  return true;
}

// --- 2: reduction identity ---------------------------------------------------
bool criterion2() {
  const OampConfig base = [] {
    OampConfig c;
    c.iterations = 10;
    c.alphabet = make_constellation(16).real_levels;
    return c;
  }();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = (trial % 2 == 0) ? 8 : 16;
    DetectionModel m;
    m.h = random_rmat(dim, dim) / std::sqrt(static_cast<double>(dim));
    m.y = random_rvec(dim);
    m.noise_var = 0.01 + 0.05 * (trial % 7);
    const RVec classic = oamp_detect(m, base).u_hat;
    const RVec net = net_forward(m, OampNetParams::identity(base.iterations), base);
    worst = std::max(worst, (classic - net).norm());
    if (worst >= 1e-10) return false;
  }
  std::printf("        (100 models, worst deviation %.2e)\n", worst);
  return true;
}

// --- 3: denoiser closed form --------------------------------------------------
bool criterion3() {
  const std::vector<double> pm1 = {-1.0, 1.0};
  for (double t2 : {1e-9, 1e-4, 0.01, 0.1, 1.0, 10.0}) {
    for (double r = -8.0; r <= 8.0; r += 0.05) {
      RVec rv(1);
      rv(0) = r;
      if (std::abs(posterior_mean(rv, t2, pm1)(0) - std::tanh(r / t2)) > 1e-12) return false;
    }
  }
  for (int order : {16, 64}) {
    const auto alphabet = make_constellation(order).real_levels;
    for (double t2 : {1e-9, 0.05, 0.8}) {
      for (double r = -6.0; r <= 6.0; r += 0.03) {
        RVec rv(1);
        rv(0) = r;
        const double m = posterior_mean(rv, t2, alphabet)(0);
        if (m < alphabet.front() - 1e-12 || m > alphabet.back() + 1e-12) return false;
      }
    }
  }
  return true;
}

// --- 4: small-instance ML oracle ----------------------------------------------
bool criterion4() {
  const int n = 2;
  const Constellation c = make_constellation(4);
  const CVec pilot = make_pilot_symbol(n);
  const auto pdp = exp_pdp(2, 1.0);
  OampConfig cfg;
  cfg.iterations = 10;
  cfg.alphabet = c.real_levels;

  std::vector<CVec> hypotheses;
  std::vector<std::vector<std::uint8_t>> hyp_bits;
  for (int m0 = 0; m0 < 4; ++m0)
    for (int m1 = 0; m1 < 4; ++m1) {
      std::vector<std::uint8_t> bits = {
          static_cast<std::uint8_t>((m0 >> 1) & 1), static_cast<std::uint8_t>(m0 & 1),
          static_cast<std::uint8_t>((m1 >> 1) & 1), static_cast<std::uint8_t>(m1 & 1)};
      hypotheses.push_back(qam_modulate(bits, c));
      hyp_bits.push_back(bits);
    }

  int agree = 0;
  const int frames = 10000;
  for (int t = 0; t < frames; ++t) {
    const std::uint64_t s = seed::combine(0xed, static_cast<std::uint64_t>(t));
    const auto ch = draw_taps(pdp, seed::combine(s, 1));
    const auto bits = random_bits(4, seed::combine(s, 2));
    const OfdmFrame frame = make_frame(bits, c, pilot);
    const RxFrame rx = transmit_cp_free(frame, ch, 15.0, seed::combine(s, 3));
    const CVec y_hat = isi_cancel(rx.y_data, ch.taps, rx.q_prev_data);
    const CMat h1 = build_cyclic_H(ch, n) - build_cutoff_A(ch, n);
    const CMat h_bar = h1 * dft_matrix_unitary(n).adjoint();
    int best = 0;
    double best_d = 1e300;
    for (size_t hyp = 0; hyp < hypotheses.size(); ++hyp) {
      const double d = (y_hat - h_bar * hypotheses[hyp]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(hyp);
      }
    }
    const SvdModel model = factorize_complex(h_bar, stack_vec(y_hat), rx.noise_var);
    if (qam_hard_demod(unstack_vec(oamp_detect(model, cfg).u_hat), c) ==
        hyp_bits[static_cast<size_t>(best)])
      ++agree;
  }
  const double frac = static_cast<double>(agree) / frames;
  std::printf("        (agreement with exhaustive ML: %.2f%%)\n", 100.0 * frac);
  return frac >= 0.95;
}

// --- 5: AWGN sanity -------------------------------------------------------------
bool criterion5() {
  const int n = 64;
  const Constellation c = make_constellation(4);
  const CVec pilot = make_pilot_symbol(n);
  ChannelRealization flat;
  flat.taps = CVec::Ones(1);
  for (double snr_db : {0.0, 4.0, 8.0}) {
    long errors = 0, bits_total = 0;
    const int frames = 800;  // 102400 bits
    for (int t = 0; t < frames; ++t) {
      const std::uint64_t s = seed::combine(0xa425, static_cast<std::uint64_t>(t) +
                                                        static_cast<std::uint64_t>(snr_db * 1e4));
      const auto bits = random_bits(static_cast<size_t>(2 * n), seed::combine(s, 1));
      const OfdmFrame frame = make_frame(bits, c, pilot);
      const auto got = detect_with_cp(frame, flat, snr_db, CpEstimator::Perfect, CpDetector::Ml,
                                      c, seed::combine(s, 2));
      errors += count_bit_errors(got, bits);
      bits_total += static_cast<long>(bits.size());
    }
    const double ber = static_cast<double>(errors) / static_cast<double>(bits_total);
    const double want = q_function(std::sqrt(std::pow(10.0, snr_db / 10.0)));
    const double sigma = std::sqrt(want * (1.0 - want) / static_cast<double>(bits_total));
    std::printf("        (%g dB: ber %.4e vs Q %.4e, 3 sigma %.1e)\n", snr_db, ber, want,
                3.0 * sigma);
    if (std::abs(ber - want) >= 3.0 * sigma) return false;
  }
  return true;
}

// --- 6: CE chain ---------------------------------------------------------------
bool criterion6(Shared& shared) {
  const int n = 64, taps = 8;
  const double snr_db = 10.0;
  const auto pdp = exp_pdp(taps, 2.0);
  const Constellation c = make_constellation(16);
  const CVec pilot = make_pilot_symbol(n);
  const double noise_var = expected_signal_power(pdp, n) * std::pow(10.0, -snr_db / 10.0);
  const CMat w_lmmse = lmmse_weights(channel_correlation(pdp, n), noise_var, 1.0);
  const CeNetParams init = ce_init_from_lmmse(w_lmmse);

  // held-out evaluation frames
  const std::size_t eval_count = 10000;
  const CeDataset held = make_ce_dataset(n, pdp, c, pilot, snr_db, eval_count, 0xe5a1);
  double mse_ls = 0.0;
  for (std::size_t i = 0; i < held.size(); ++i)
    mse_ls += (held.inputs[i] - held.targets[i]).squaredNorm();
  mse_ls /= static_cast<double>(held.size());
  const double mse_lmmse = ce_loss(init.w, held, 0, held.size());
  std::printf("        (per-frame MSE over %zu frames: LS %.4e, LMMSE %.4e)\n", held.size(),
              mse_ls, mse_lmmse);
  if (!(mse_lmmse <= mse_ls)) return false;

  // desk-scale training
  const CeDataset train = make_ce_dataset(n, pdp, c, pilot, snr_db, 50000, 0x7ace);
  CeTrainConfig tc;
  tc.epochs = 4;
  tc.batch_size = 50;
  tc.shuffle_seed = 11;
  CeNetParams init_meta = init;
  init_meta.train_snr_db = snr_db;
  init_meta.seed = 0x7ace;
  const CeNetParams trained = ce_train(init_meta, train, tc);
  const double mse_trained = ce_loss(trained.w, held, 0, held.size());
  std::printf("        (trained CE MSE %.4e vs LMMSE-initialized %.4e)\n", mse_trained,
              mse_lmmse);
  shared.ce_ckpt = (shared.dir / "ce.ckpt").string();
  save_ce_checkpoint(trained, shared.ce_ckpt);
  return mse_trained <= 1.01 * mse_lmmse;
}

// --- 7: trained detector beats (or ties) the classic one ------------------------
bool criterion7(Shared& shared) {
  SimConfig sim;
  sim.n = 64;
  sim.qam = 16;
  sim.taps = 8;
  sim.decay = 2.0;
  sim.oamp_iterations = 10;
  sim.seed = 2026;
  sim.ce_checkpoint = shared.ce_ckpt;

  // desk-scale training at 20 dB with the frozen CE front end; the learning
  // rate is the desk-scale value matching the shortened schedule
  LinkSetup link = link_setup_from(sim);
  const CeNetParams ce = load_ce_checkpoint(shared.ce_ckpt, sim.n);
  OampNetTrainConfig tc;
  tc.epochs = 500;
  tc.batch_size = 100;
  tc.dev_samples = 512;
  tc.confirm_samples = 2048;
  tc.adam.learning_rate = 0.01;
  tc.train_snr_db = shared.train_snr_db;
  tc.seed = 17;
  const auto t0 = std::chrono::steady_clock::now();
  const OampNetTrainResult res =
      train_oamp_net(OampNetParams::identity(sim.oamp_iterations), tc, ce, link);
  const double train_secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0).count();
  std::printf("        (training: %.0f s, confirmation BER %.4e -> %.4e)\n", train_secs,
              res.init_dev_ber, res.best_dev_ber);
  shared.net_ckpt = (shared.dir / "oampnet.ckpt").string();
  save_oamp_net_checkpoint(res.params, shared.net_ckpt);
  save_train_history(res.history, (shared.dir / "oampnet_loss.csv").string());

  // per-point error targets: every point clears the 1000-error floor, and
  // the decisive training-SNR comparison runs to much tighter statistics
  sim.receivers = {"oamp", "dl-oamp"};
  sim.oampnet_checkpoint = shared.net_ckpt;
  sim.frame_cap = 50000;
  std::vector<BerRecord> records;
  const std::pair<double, long> points[] = {{10.0, 10000}, {20.0, 40000}, {30.0, 2000}};
  for (const auto& [snr, target] : points) {
    sim.snr_grid = {snr};
    sim.target_errors = target;
    for (auto& r : run_ber_sweep(sim)) records.push_back(std::move(r));
  }
  sim.snr_grid = {10.0, 20.0, 30.0};

  auto ber_of = [&](const std::string& name, double snr) {
    for (const auto& r : records)
      if (r.receiver == name && r.snr_db == snr) return r.ber;
    throw std::runtime_error("criterion7: missing record");
  };
  bool ok = true;
  for (double snr : sim.snr_grid) {
    const double classic = ber_of("oamp", snr);
    const double trained = ber_of("dl-oamp", snr);
    const bool at_train_snr = snr == shared.train_snr_db;
    const bool point_ok = at_train_snr ? trained <= classic : trained <= 1.05 * classic;
    std::printf("        (%g dB: oamp %.4e, dl-oamp %.4e%s) %s\n", snr, classic, trained,
                at_train_snr ? ", training SNR" : "", point_ok ? "" : "<-- VIOLATION");
    ok = ok && point_ok;
  }
  return ok;
}

// --- 8: BER trend over SNR -------------------------------------------------------
bool criterion8(const Shared& shared) {
  SimConfig sim;
  sim.n = 64;
  sim.qam = 16;
  sim.taps = 8;
  sim.decay = 2.0;
  sim.oamp_iterations = 10;
  sim.seed = 31;
  sim.snr_grid = {5, 10, 15, 20, 25, 30};
  sim.receivers = {"ls-mmse", "lmmse-mmse", "isi-mmse", "oamp", "dl-oamp", "cp-mmse",
                   "cp-ml-csi"};
  sim.target_errors = 3000;
  sim.frame_cap = 30000;
  sim.ce_checkpoint = shared.ce_ckpt;
  sim.oampnet_checkpoint = shared.net_ckpt;
  const auto records = run_ber_sweep(sim);

  bool ok = true;
  for (const auto& name : sim.receivers) {
    std::vector<const BerRecord*> curve;
    for (const auto& r : records)
      if (r.receiver == name) curve.push_back(&r);
    for (size_t i = 0; i + 1 < curve.size(); ++i) {
      const auto se = [](const BerRecord& r) {
        return std::sqrt(std::max(r.ber * (1.0 - r.ber), 0.0) /
                         static_cast<double>(r.bits_sent));
      };
      const double rise = curve[i + 1]->ber - curve[i]->ber;
      const double slack =
          2.0 * std::sqrt(se(*curve[i]) * se(*curve[i]) + se(*curve[i + 1]) * se(*curve[i + 1]));
      if (rise > 0.0 && rise >= slack) {
        std::printf("        (%s: BER rises %.3e from %g to %g dB, slack %.3e) <-- VIOLATION\n",
                    name.c_str(), rise, curve[i]->snr_db, curve[i + 1]->snr_db, slack);
        ok = false;
      }
    }
  }
  if (ok) std::printf("        (all %zu receivers non-increasing within slack)\n",
                      sim.receivers.size());
  return ok;
}

// --- 9: gradient correctness -------------------------------------------------------
bool criterion9() {
  // CE: analytic vs central differences on a 2N = 8 toy
  const int dim = 8;
  CeDataset data;
  for (int i = 0; i < 6; ++i) {
    data.inputs.push_back(random_rvec(dim));
    data.targets.push_back(random_rvec(dim));
  }
  RMat w = random_rmat(dim, dim);
  const RMat analytic = ce_grad(w, data, 0, data.size());
  const auto loss_of = [&](const RVec& flat) {
    const RMat wm = Eigen::Map<const RMat>(flat.data(), dim, dim);
    return ce_loss(wm, data, 0, data.size());
  };
  const Eigen::Map<const RVec> wflat(w.data(), w.size());
  const RVec fd = fd_gradient(loss_of, wflat, 1e-6);
  const Eigen::Map<const RVec> aflat(analytic.data(), analytic.size());
  const double rel = (aflat - fd).norm() / aflat.norm();
  std::printf("        (CE gradient relative error %.2e)\n", rel);
  if (rel >= 1e-5) return false;

  // detector: Richardson consistency of the finite-difference gradient
  OampConfig cfg;
  cfg.iterations = 3;
  cfg.alphabet = make_constellation(16).real_levels;
  OampNetParams p = OampNetParams::identity(3);
  p.lambda(0) = 1.07;
  p.gamma(1) = 0.93;
  std::vector<NetSample> batch;
  for (int i = 0; i < 4; ++i) {
    DetectionModel m;
    m.h = random_rmat(8, 8) / std::sqrt(8.0);
    m.y = random_rvec(8);
    m.noise_var = 0.3;
    NetSample s;
    s.model = factorize(m);
    s.u_true = random_rvec(8);
    batch.push_back(s);
  }
  const RVec g1 = net_grad_fd(p, batch, cfg, 4e-3);
  const RVec g2 = net_grad_fd(p, batch, cfg, 2e-3);
  const RVec extrap = (4.0 * g2 - g1) / 3.0;
  const double e1 = (g1 - extrap).norm();
  const double e2 = (g2 - extrap).norm();
  std::printf("        (Richardson: err(h) %.3e, err(h/2) %.3e)\n", e1, e2);
  return e2 <= 0.5 * e1 + 1e-12;
}

// --- 10: byte-identical sweeps through the CLI -------------------------------------
bool criterion10(const Shared& shared) {
  const fs::path cfg_path = shared.dir / "sweep.cfg";
  const fs::path out_a = shared.dir / "sweep_a.csv";
  const fs::path out_b = shared.dir / "sweep_b.csv";
  {
    std::ofstream cfg(cfg_path);
    cfg << "sim.n = 16\nsim.constellation = 4\nsim.snr_db = 5,10\n"
        << "channel.taps = 4\nsim.target_bit_errors = 100\nsim.frame_cap = 200\n"
        << "sim.receivers = ls-mmse,lmmse-mmse\nsim.seed = 91\n";
  }
  const std::string base = std::string(DLOAMP_CLI_PATH) + " ber-sweep --config " +
                           cfg_path.string();
  const std::string cmd_a = base + " --out " + out_a.string() + " > /dev/null 2>&1";
  const std::string cmd_b = base + " --out " + out_b.string() + " > /dev/null 2>&1";
  if (std::system(cmd_a.c_str()) != 0) return false;
  if (std::system(cmd_b.c_str()) != 0) return false;
  std::ifstream fa(out_a, std::ios::binary), fb(out_b, std::ios::binary);
  const std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  std::printf("        (two CLI runs, %zu bytes each)\n", a.size());
  return !a.empty() && a == b;
}

struct Criterion {
  int id;
  const char* label;
  bool (*fn)(Shared&);
};

bool wrap1(Shared&) { return criterion1(); }
bool wrap2(Shared&) { return criterion2(); }
bool wrap3(Shared&) { return criterion3(); }
bool wrap4(Shared&) { return criterion4(); }
bool wrap5(Shared&) { return criterion5(); }
bool wrap6(Shared& s) { return criterion6(s); }
bool wrap7(Shared& s) { return criterion7(s); }
bool wrap8(Shared& s) { return criterion8(s); }
bool wrap9(Shared&) { return criterion9(); }
bool wrap10(Shared& s) { return criterion10(s); }

}  // namespace

int main() {
  Shared shared;
  shared.dir = fs::temp_directory_path() / "dloamp_acceptance";
  fs::create_directories(shared.dir);

  const Criterion criteria[] = {
      {1, "structural algebra: diagonalization and Toeplitz cut", wrap1},
      {2, "reduction identity: unfolded net at ones equals OAMP", wrap2},
      {3, "denoiser closed form and boundedness", wrap3},
      {4, "near-ML detection on the exhaustive toy", wrap4},
      {5, "AWGN QPSK BER matches the closed form", wrap5},
      {6, "channel estimation chain refines LS", wrap6},
      {7, "trained detector does not lose to classic OAMP", wrap7},
      {8, "BER curves fall with SNR for every receiver", wrap8},
      {9, "gradient correctness (analytic and Richardson)", wrap9},
      {10, "byte-identical sweep CSVs", wrap10},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.fn(shared);
    } catch (const std::exception& e) {
      std::printf("        (exception: %s)\n", e.what());
      ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", c.id, c.label, secs);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("acceptance: %d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
