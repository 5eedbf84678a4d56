// SPDX-License-Identifier: Apache-2.0
#include "dloamp/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dloamp {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& path, std::istream& in, const std::string& what) {
  const auto off = in.tellg();
  throw std::runtime_error("checkpoint: " + path + ": " + what + " (byte offset " +
                           std::to_string(off == std::streampos(-1) ? -1 : static_cast<long>(off)) +
                           ")");
}

std::string expect_token(const std::string& path, std::istream& in) {
  std::string tok;
  if (!(in >> tok)) parse_fail(path, in, "unexpected end of file");
  return tok;
}

double expect_double(const std::string& path, std::istream& in) {
  double v = 0.0;
  if (!(in >> v)) parse_fail(path, in, "expected a number");
  return v;
}

long expect_long(const std::string& path, std::istream& in) {
  long v = 0;
  if (!(in >> v)) parse_fail(path, in, "expected an integer");
  return v;
}

std::uint64_t expect_u64(const std::string& path, std::istream& in) {
  std::uint64_t v = 0;
  if (!(in >> v)) parse_fail(path, in, "expected an unsigned integer");
  return v;
}

void expect_keyword(const std::string& path, std::istream& in, const std::string& kw) {
  const std::string tok = expect_token(path, in);
  if (tok != kw) parse_fail(path, in, "expected '" + kw + "', got '" + tok + "'");
}

}  // namespace

void save_ce_checkpoint(const CeNetParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  const int n = static_cast<int>(params.w.rows()) / 2;
  out << "dloamp-ce-checkpoint v1\n";
  out << "n " << n << "\n";
  out << "epochs_trained " << params.epochs_trained << "\n";
  out << "train_snr_db " << fmt17(params.train_snr_db) << "\n";
  out << "seed " << params.seed << "\n";
  out << "loss_history " << params.loss_history.size();
  for (double v : params.loss_history) out << " " << fmt17(v);
  out << "\n";
  out << "w\n";
  for (Eigen::Index r = 0; r < params.w.rows(); ++r) {
    for (Eigen::Index c = 0; c < params.w.cols(); ++c) {
      if (c) out << " ";
      out << fmt17(params.w(r, c));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("checkpoint: write failure on " + path);
}

CeNetParams load_ce_checkpoint(const std::string& path, int expected_n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  expect_keyword(path, in, "dloamp-ce-checkpoint");
  expect_keyword(path, in, "v1");
  expect_keyword(path, in, "n");
  const long n = expect_long(path, in);
  if (n <= 0) parse_fail(path, in, "bad dimension");
  if (expected_n > 0 && n != expected_n)
    throw std::runtime_error("checkpoint: " + path + ": dimension mismatch (file n=" +
                             std::to_string(n) + ", expected n=" + std::to_string(expected_n) +
                             ")");
  CeNetParams params;
  expect_keyword(path, in, "epochs_trained");
  params.epochs_trained = static_cast<int>(expect_long(path, in));
  expect_keyword(path, in, "train_snr_db");
  params.train_snr_db = expect_double(path, in);
  expect_keyword(path, in, "seed");
  params.seed = expect_u64(path, in);
  expect_keyword(path, in, "loss_history");
  const long n_hist = expect_long(path, in);
  params.loss_history.resize(static_cast<size_t>(n_hist));
  for (long i = 0; i < n_hist; ++i) params.loss_history[static_cast<size_t>(i)] = expect_double(path, in);
  expect_keyword(path, in, "w");
  params.w.resize(2 * n, 2 * n);
  for (Eigen::Index r = 0; r < 2 * n; ++r)
    for (Eigen::Index c = 0; c < 2 * n; ++c) params.w(r, c) = expect_double(path, in);
  return params;
}

void save_oamp_net_checkpoint(const OampNetParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << "dloamp-oampnet-checkpoint v1\n";
  out << "layers " << params.layers() << "\n";
  out << "train_snr_db " << fmt17(params.train_snr_db) << "\n";
  out << "seed " << params.seed << "\n";
  out << "lambda";
  for (Eigen::Index i = 0; i < params.lambda.size(); ++i) out << " " << fmt17(params.lambda(i));
  out << "\ngamma";
  for (Eigen::Index i = 0; i < params.gamma.size(); ++i) out << " " << fmt17(params.gamma(i));
  out << "\n";
  if (!out) throw std::runtime_error("checkpoint: write failure on " + path);
}

OampNetParams load_oamp_net_checkpoint(const std::string& path, int expected_layers) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  expect_keyword(path, in, "dloamp-oampnet-checkpoint");
  expect_keyword(path, in, "v1");
  expect_keyword(path, in, "layers");
  const long layers = expect_long(path, in);
  if (layers <= 0) parse_fail(path, in, "bad layer count");
  if (expected_layers > 0 && layers != expected_layers)
    throw std::runtime_error("checkpoint: " + path + ": layer mismatch (file L=" +
                             std::to_string(layers) + ", expected L=" +
                             std::to_string(expected_layers) + ")");
  OampNetParams params;
  expect_keyword(path, in, "train_snr_db");
  params.train_snr_db = expect_double(path, in);
  expect_keyword(path, in, "seed");
  params.seed = expect_u64(path, in);
  expect_keyword(path, in, "lambda");
  params.lambda.resize(layers);
  for (long i = 0; i < layers; ++i) params.lambda(i) = expect_double(path, in);
  expect_keyword(path, in, "gamma");
  params.gamma.resize(layers);
  for (long i = 0; i < layers; ++i) params.gamma(i) = expect_double(path, in);
  return params;
}

void save_train_history(const std::vector<TrainEpochRecord>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << "epoch,train_loss,dev_loss,dev_ber\n";
  for (const auto& rec : history)
    out << rec.epoch << "," << fmt17(rec.train_loss) << "," << fmt17(rec.dev_loss) << ","
        << fmt17(rec.dev_ber) << "\n";
  if (!out) throw std::runtime_error("checkpoint: write failure on " + path);
}

}  // namespace dloamp
