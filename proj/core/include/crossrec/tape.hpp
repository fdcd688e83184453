#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "crossrec/activation.hpp"
#include "crossrec/dense_matrix.hpp"

namespace crossrec {

/// Minimal reverse-mode tape over vector-valued nodes. The op set is exactly
/// what the rating models need: row/vector parameter lookups, matrix-vector
/// products, bias adds, elementwise activations and products, dot products,
/// and the two loss reductions. Parameter gradients accumulate into
/// caller-owned buffers (same shape as the parameter, zeroed by the caller
/// before a batch).
class Tape {
 public:
  using Var = std::size_t;

  /// Constant node; no gradient flows into it.
  Var input(Vector v);

  /// Row r of parameter matrix P; gradient accumulates into row r of G.
  Var row_param(const DenseMatrix& P, DenseMatrix& G, std::size_t r);

  /// Whole parameter vector (e.g. a prediction head).
  Var vec_param(const Vector& w, Vector& gw);

  /// y = W x where W is a trainable matrix.
  Var matvec_param(const DenseMatrix& W, DenseMatrix& GW, Var x);

  Var add(Var a, Var b);

  /// x + b with trainable bias b.
  Var add_bias(Var a, const Vector& b, Vector& gb);

  /// Elementwise activation.
  Var activate(Var a, ActivationKind act);

  Var hadamard(Var a, Var b);

  /// Elementwise product with a constant mask (dropout).
  Var mask_mul(Var a, Vector mask);

  Var scale(Var a, double c);

  /// Scalar node: a . b
  Var dot(Var a, Var b);

  /// Scalar node: sum of entries (dot with all-ones, used by frozen heads).
  Var sum(Var a);

  /// ca*a + cb*b, elementwise (used for the wide/deep logit fusion).
  Var combine(double ca, Var a, double cb, Var b);

  /// Scalar: coeff * sum_i (pred_i - target_i)^2 over scalar prediction nodes.
  Var sq_error(const std::vector<Var>& preds, const Vector& targets, double coeff);

  /// Scalar: sum over entries with truth > 0 of (decoded_i - truth_i)^2.
  Var masked_sq_norm(Var decoded, Vector truth);

  /// Scalar: sum_i weights_i * scalars_i.
  Var weighted_sum(const std::vector<Var>& scalars, const Vector& weights);

  double value_scalar(Var v) const { return nodes_[v].value[0]; }
  const Vector& value(Var v) const { return nodes_[v].value; }

  /// Reverse sweep seeding d(loss)/d(loss) = 1.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Vector value;
    Vector grad;
    std::function<void(Tape&, Node&)> back;
  };

  Var push(Vector v, std::function<void(Tape&, Node&)> back);
  Vector& grad_of(Var v);

  std::vector<Node> nodes_;
};

}  // namespace crossrec
