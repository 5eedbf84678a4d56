// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dloamp/baselines.hpp"
#include "dloamp/config.hpp"
#include "dloamp/oamp_net.hpp"

namespace dloamp {

enum class ReceiverKind {
  LsMmse,
  LmmseMmse,
  IsiCancelMmse,
  CeOamp,
  DlOamp,
  CpMmse,
  CpMlCsi,
};

ReceiverKind receiver_from_name(const std::string& name);
std::string receiver_name(ReceiverKind kind);

struct SimConfig {
  int n = 64;
  int qam = 16;
  std::vector<double> snr_grid = {5, 10, 15, 20, 25, 30};
  int taps = 8;
  double decay = 2.0;
  long target_errors = 1000;
  long frame_cap = 1000000;
  std::vector<std::string> receivers = {"ls-mmse", "lmmse-mmse", "isi-mmse",
                                        "oamp",    "dl-oamp",    "cp-mmse",
                                        "cp-ml-csi"};
  std::uint64_t seed = 1;
  int oamp_iterations = 10;
  double oamp_beta = 0.5;
  double oamp_epsilon = 1e-9;
  double oamp_initial_v_sq = 1.0;
  std::string ce_checkpoint;       // empty: LMMSE-initialized weights per SNR point
  std::string oampnet_checkpoint;  // required when dl-oamp is requested
  std::string out_csv = "ber.csv";
  bool measured_wall_seconds = false;  // default keeps repeated CSVs byte identical
  std::string dump_trajectory;         // optional per-point OAMP trace file
};

SimConfig sim_config_from(const ConfigMap& cfg);
void validate(const SimConfig& cfg);

struct BerRecord {
  std::string receiver;
  double snr_db = 0.0;
  long bits_sent = 0;
  long bit_errors = 0;
  double ber = 0.0;
  long frames = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool reached_target = false;  // logged, not part of the CSV schema
};

/// Monte Carlo sweep over (receiver, SNR).  Frames are chained within a
/// point (a pilot sees the previous frame's data tail, the first frame sees
/// none) and seeded from (master seed, receiver name, SNR, frame index), so
/// results are independent of the receiver list order.
std::vector<BerRecord> run_ber_sweep(
    const SimConfig& cfg, const std::function<void(const BerRecord&)>& on_point = nullptr);

/// CSV with the fixed header
/// receiver,snr_db,bits_sent,bit_errors,ber,frames,wall_seconds,seed
/// (LF endings; doubles at 17 significant digits so parsing is exact).
void emit_csv(const std::vector<BerRecord>& records, const std::string& path);
std::vector<BerRecord> parse_csv(const std::string& path);

/// Mean per-sample power of (H - A) F^H u over symbols and channel draws,
/// = (N - sum_l l p_l) / N for unit-energy symbols.
double expected_signal_power(const PowerDelayProfile& pdp, int n_subcarriers);

/// Shared link construction used by the CLI training commands.
LinkSetup link_setup_from(const SimConfig& cfg);
OampConfig oamp_config_from(const SimConfig& cfg, const Constellation& c);

/// Quick in-process invariant checks behind the `selftest` subcommand.
/// Returns the number of failed checks and prints one line per check.
int run_selftest();

/// Renders BER curves from a sweep CSV into an SVG (log-scale y axis).
void render_ber_svg(const std::vector<BerRecord>& records, const std::string& path);

}  // namespace dloamp
