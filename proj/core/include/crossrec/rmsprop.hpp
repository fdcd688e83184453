#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "crossrec/dense_matrix.hpp"

namespace crossrec {

/// Per-tensor RMSProp state. The accumulator has the same shape as the
/// parameter it tracks and stays >= 0 by construction.
struct OptimizerState {
  Vector acc;
  double rho = 0.9;
  double eps = 1e-8;
  double lr = 0.005;

  explicit OptimizerState(std::size_t n = 0, double rho_ = 0.9, double eps_ = 1e-8,
                          double lr_ = 0.005)
      : acc(n, 0.0), rho(rho_), eps(eps_), lr(lr_) {}
};

/// acc <- rho*acc + (1-rho)*g^2 ; param <- param - lr*g/sqrt(acc+eps)
inline void rmsprop_step(std::span<double> param, std::span<const double> grad,
                         OptimizerState& state) {
  if (param.size() != grad.size() || param.size() != state.acc.size())
    throw std::invalid_argument("rmsprop_step: shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) throw std::runtime_error("rmsprop_step: nonfinite gradient");
    state.acc[i] = state.rho * state.acc[i] + (1.0 - state.rho) * g * g;
    param[i] -= state.lr * g / std::sqrt(state.acc[i] + state.eps);
  }
}

inline void sgd_step(std::span<double> param, std::span<const double> grad, double lr) {
  if (param.size() != grad.size()) throw std::invalid_argument("sgd_step: shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) {
    if (!std::isfinite(grad[i])) throw std::runtime_error("sgd_step: nonfinite gradient");
    param[i] -= lr * grad[i];
  }
}

}  // namespace crossrec
