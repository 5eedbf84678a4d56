// SPDX-License-Identifier: Apache-2.0
#include "dloamp/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dloamp {

RVec adam_step(AdamState& state, const RVec& params, const RVec& grad) {
  if (params.size() != state.m.size() || grad.size() != state.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  ++state.step;
  state.m = state.cfg.beta1 * state.m + (1.0 - state.cfg.beta1) * grad;
  state.v = state.cfg.beta2 * state.v + (1.0 - state.cfg.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
  const RVec m_hat = state.m / bc1;
  const RVec v_hat = state.v / bc2;
  return params -
         state.cfg.learning_rate *
             m_hat.cwiseQuotient(v_hat.cwiseSqrt().array().matrix() +
                                 RVec::Constant(params.size(), state.cfg.epsilon));
}

}  // namespace dloamp
