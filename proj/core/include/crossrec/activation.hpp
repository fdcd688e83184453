#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "crossrec/dense_matrix.hpp"

namespace crossrec {

enum class ActivationKind { Sigmoid, Tanh, Identity };

inline double activate(double z, ActivationKind act) {
  switch (act) {
    case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case ActivationKind::Tanh: return std::tanh(z);
    case ActivationKind::Identity: return z;
  }
  throw std::invalid_argument("unknown activation");
}

/// Derivative expressed through the output value y = act(z).
inline double activate_grad(double y, ActivationKind act) {
  switch (act) {
    case ActivationKind::Sigmoid: return y * (1.0 - y);
    case ActivationKind::Tanh: return 1.0 - y * y;
    case ActivationKind::Identity: return 1.0;
  }
  throw std::invalid_argument("unknown activation");
}

/// act(Wx + b)
inline Vector affine_forward(std::span<const double> x, const DenseMatrix& W,
                             std::span<const double> b, ActivationKind act) {
  if (b.size() != W.rows()) throw std::invalid_argument("affine_forward: bias shape");
  Vector y = matvec(W, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = activate(y[i] + b[i], act);
  return y;
}

inline std::string to_string(ActivationKind act) {
  switch (act) {
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Identity: return "identity";
  }
  return "?";
}

}  // namespace crossrec
