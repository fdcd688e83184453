#include "crossrec/tape.hpp"

#include <stdexcept>

namespace crossrec {

Tape::Var Tape::push(Vector v, std::function<void(Tape&, Node&)> back) {
  nodes_.push_back(Node{std::move(v), {}, std::move(back)});
  return nodes_.size() - 1;
}

Vector& Tape::grad_of(Var v) {
  Node& n = nodes_[v];
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Tape::Var Tape::input(Vector v) { return push(std::move(v), nullptr); }

Tape::Var Tape::row_param(const DenseMatrix& P, DenseMatrix& G, std::size_t r) {
  auto rv = P.row(r);
  Vector v(rv.begin(), rv.end());
  return push(std::move(v), [&G, r](Tape&, Node& n) {
    auto gr = G.row(r);
    for (std::size_t i = 0; i < gr.size(); ++i) gr[i] += n.grad[i];
  });
}

Tape::Var Tape::vec_param(const Vector& w, Vector& gw) {
  return push(w, [&gw](Tape&, Node& n) {
    for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += n.grad[i];
  });
}

Tape::Var Tape::matvec_param(const DenseMatrix& W, DenseMatrix& GW, Var x) {
  Vector y = matvec(W, nodes_[x].value);
  return push(std::move(y), [&W, &GW, x](Tape& t, Node& n) {
    const Vector& xv = t.nodes_[x].value;
    Vector& gx = t.grad_of(x);
    for (std::size_t r = 0; r < W.rows(); ++r) {
      const double gy = n.grad[r];
      if (gy == 0.0) continue;
      auto gwr = GW.row(r);
      auto wr = W.row(r);
      for (std::size_t c = 0; c < W.cols(); ++c) {
        gwr[c] += gy * xv[c];
        gx[c] += gy * wr[c];
      }
    }
  });
}

Tape::Var Tape::add(Var a, Var b) {
  const Vector& va = nodes_[a].value;
  const Vector& vb = nodes_[b].value;
  if (va.size() != vb.size()) throw std::invalid_argument("Tape::add: shape mismatch");
  Vector v(va.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] + vb[i];
  return push(std::move(v), [a, b](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    Vector& gb = t.grad_of(b);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      ga[i] += n.grad[i];
      gb[i] += n.grad[i];
    }
  });
}

Tape::Var Tape::add_bias(Var a, const Vector& b, Vector& gb) {
  const Vector& va = nodes_[a].value;
  if (va.size() != b.size()) throw std::invalid_argument("Tape::add_bias: shape mismatch");
  Vector v(va.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] + b[i];
  return push(std::move(v), [a, &gb](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      ga[i] += n.grad[i];
      gb[i] += n.grad[i];
    }
  });
}

Tape::Var Tape::activate(Var a, ActivationKind act) {
  Vector v = nodes_[a].value;
  for (double& x : v) x = crossrec::activate(x, act);
  return push(std::move(v), [a, act](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      ga[i] += n.grad[i] * activate_grad(n.value[i], act);
  });
}

Tape::Var Tape::hadamard(Var a, Var b) {
  const Vector& va = nodes_[a].value;
  const Vector& vb = nodes_[b].value;
  if (va.size() != vb.size()) throw std::invalid_argument("Tape::hadamard: shape mismatch");
  Vector v(va.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] * vb[i];
  return push(std::move(v), [a, b](Tape& t, Node& n) {
    const Vector& va = t.nodes_[a].value;
    const Vector& vb = t.nodes_[b].value;
    Vector& ga = t.grad_of(a);
    Vector& gb = t.grad_of(b);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      ga[i] += n.grad[i] * vb[i];
      gb[i] += n.grad[i] * va[i];
    }
  });
}

Tape::Var Tape::mask_mul(Var a, Vector mask) {
  const Vector& va = nodes_[a].value;
  if (va.size() != mask.size()) throw std::invalid_argument("Tape::mask_mul: shape mismatch");
  Vector v(va.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] * mask[i];
  return push(std::move(v), [a, m = std::move(mask)](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * m[i];
  });
}

Tape::Var Tape::scale(Var a, double c) {
  Vector v = nodes_[a].value;
  for (double& x : v) x *= c;
  return push(std::move(v), [a, c](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * c;
  });
}

Tape::Var Tape::dot(Var a, Var b) {
  const Vector& va = nodes_[a].value;
  const Vector& vb = nodes_[b].value;
  double s = crossrec::dot(va, vb);
  return push(Vector{s}, [a, b](Tape& t, Node& n) {
    const Vector& va = t.nodes_[a].value;
    const Vector& vb = t.nodes_[b].value;
    Vector& ga = t.grad_of(a);
    Vector& gb = t.grad_of(b);
    const double g = n.grad[0];
    for (std::size_t i = 0; i < va.size(); ++i) {
      ga[i] += g * vb[i];
      gb[i] += g * va[i];
    }
  });
}

Tape::Var Tape::sum(Var a) {
  const Vector& va = nodes_[a].value;
  double s = 0.0;
  for (double x : va) s += x;
  return push(Vector{s}, [a](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += n.grad[0];
  });
}

Tape::Var Tape::combine(double ca, Var a, double cb, Var b) {
  const Vector& va = nodes_[a].value;
  const Vector& vb = nodes_[b].value;
  if (va.size() != vb.size()) throw std::invalid_argument("Tape::combine: shape mismatch");
  Vector v(va.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ca * va[i] + cb * vb[i];
  return push(std::move(v), [a, b, ca, cb](Tape& t, Node& n) {
    Vector& ga = t.grad_of(a);
    Vector& gb = t.grad_of(b);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      ga[i] += n.grad[i] * ca;
      gb[i] += n.grad[i] * cb;
    }
  });
}

Tape::Var Tape::sq_error(const std::vector<Var>& preds, const Vector& targets, double coeff) {
  if (preds.size() != targets.size()) throw std::invalid_argument("Tape::sq_error: length");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = nodes_[preds[i]].value[0] - targets[i];
    s += d * d;
  }
  return push(Vector{coeff * s}, [ps = preds, targets, coeff](Tape& t, Node& n) {
    const double g = n.grad[0];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double d = t.nodes_[ps[i]].value[0] - targets[i];
      t.grad_of(ps[i])[0] += g * coeff * 2.0 * d;
    }
  });
}

Tape::Var Tape::masked_sq_norm(Var decoded, Vector truth) {
  const Vector& vd = nodes_[decoded].value;
  if (vd.size() != truth.size()) throw std::invalid_argument("Tape::masked_sq_norm: shape");
  double s = 0.0;
  for (std::size_t i = 0; i < vd.size(); ++i) {
    if (truth[i] > 0.0) {
      const double d = vd[i] - truth[i];
      s += d * d;
    }
  }
  return push(Vector{s}, [decoded, tr = std::move(truth)](Tape& t, Node& n) {
    const Vector& vd = t.nodes_[decoded].value;
    Vector& gd = t.grad_of(decoded);
    const double g = n.grad[0];
    for (std::size_t i = 0; i < vd.size(); ++i)
      if (tr[i] > 0.0) gd[i] += g * 2.0 * (vd[i] - tr[i]);
  });
}

Tape::Var Tape::weighted_sum(const std::vector<Var>& scalars, const Vector& weights) {
  if (scalars.size() != weights.size()) throw std::invalid_argument("Tape::weighted_sum: length");
  double s = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) s += weights[i] * nodes_[scalars[i]].value[0];
  return push(Vector{s}, [vs = scalars, weights](Tape& t, Node& n) {
    const double g = n.grad[0];
    for (std::size_t i = 0; i < vs.size(); ++i) t.grad_of(vs[i])[0] += g * weights[i];
  });
}

void Tape::backward(Var loss) {
  grad_of(loss)[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back && !n.grad.empty()) n.back(*this, n);
  }
}

}  // namespace crossrec
