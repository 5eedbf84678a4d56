// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dloamp/numerics.hpp"

namespace dloamp {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators over a flat parameter vector.
struct AdamState {
  AdamConfig cfg;
  long step = 0;
  RVec m, v;
  explicit AdamState(Eigen::Index n_params, AdamConfig c = {})
      : cfg(c), m(RVec::Zero(n_params)), v(RVec::Zero(n_params)) {}
};

/// One bias-corrected Adam update; returns the new parameter vector.
RVec adam_step(AdamState& state, const RVec& params, const RVec& grad);

}  // namespace dloamp
