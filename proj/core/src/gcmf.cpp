#include "crossrec/gcmf.hpp"

#include <stdexcept>

namespace crossrec {

GcmfFlags gcmf_flags(GcmfMode mode) {
  switch (mode) {
    case GcmfMode::Full:
      return {false, false, false, ActivationKind::Sigmoid};
    case GcmfMode::Cmf:
      return {true, true, false, ActivationKind::Identity};
    case GcmfMode::Gmf:
      return {true, false, true, ActivationKind::Sigmoid};
    case GcmfMode::Pmf:
      return {true, true, true, ActivationKind::Identity};
    case GcmfMode::GmfCd:
      return {true, false, false, ActivationKind::Sigmoid};
  }
  throw std::invalid_argument("unknown GcmfMode");
}

std::string to_string(GcmfMode mode) {
  switch (mode) {
    case GcmfMode::Full: return "gcmf";
    case GcmfMode::Cmf: return "cmf";
    case GcmfMode::Gmf: return "gmf";
    case GcmfMode::Pmf: return "pmf";
    case GcmfMode::GmfCd: return "gmf_cd";
  }
  return "?";
}

GcmfMode gcmf_mode_from_string(const std::string& s) {
  if (s == "gcmf") return GcmfMode::Full;
  if (s == "cmf") return GcmfMode::Cmf;
  if (s == "gmf") return GcmfMode::Gmf;
  if (s == "pmf") return GcmfMode::Pmf;
  if (s == "gmf_cd") return GcmfMode::GmfCd;
  throw std::invalid_argument("unknown gcmf mode: " + s);
}

GcmfParams make_gcmf_params(std::size_t num_users, std::size_t num_items, std::size_t k) {
  GcmfParams p;
  p.user_shared = DenseMatrix(num_users, k);
  p.user_offset[0] = DenseMatrix(num_users, k);
  p.user_offset[1] = DenseMatrix(num_users, k);
  p.items = DenseMatrix(num_items, k);
  p.head.assign(k, 0.0);
  return p;
}

Vector gcmf_user_embed(const GcmfParams& p, std::uint32_t u, Domain d, bool zero_offset) {
  auto shared = p.user_shared.row(u);
  Vector v(shared.begin(), shared.end());
  if (!zero_offset) {
    auto off = p.user_offset[static_cast<int>(d)].row(u);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += off[i];
  }
  return v;
}

double gcmf_logit(const GcmfParams& p, const GcmfFlags& flags, std::uint32_t u,
                  std::uint32_t j, Domain d, bool cold_start) {
  const bool zero_offset = flags.freeze_offsets || cold_start;
  auto q = p.items.row(j);
  double s = 0.0;
  if (zero_offset) {
    auto pu = p.user_shared.row(u);
    if (flags.freeze_head) {
      for (std::size_t i = 0; i < q.size(); ++i) s += pu[i] * q[i];
    } else {
      for (std::size_t i = 0; i < q.size(); ++i) s += pu[i] * q[i] * p.head[i];
    }
  } else {
    Vector pu = gcmf_user_embed(p, u, d, false);
    if (flags.freeze_head) {
      for (std::size_t i = 0; i < q.size(); ++i) s += pu[i] * q[i];
    } else {
      for (std::size_t i = 0; i < q.size(); ++i) s += pu[i] * q[i] * p.head[i];
    }
  }
  return s;
}

double gcmf_predict(const GcmfParams& p, const GcmfFlags& flags, std::uint32_t u,
                    std::uint32_t j, Domain d, double gamma_max, bool cold_start) {
  const double logit = gcmf_logit(p, flags, u, j, d, cold_start);
  if (flags.final_act == ActivationKind::Identity) return logit;
  return gamma_max * activate(logit, flags.final_act);
}

Tape::Var gcmf_logit_var(Tape& tape, const GcmfParams& p, GcmfParams& g,
                         const GcmfFlags& flags, std::uint32_t u, std::uint32_t j, Domain d,
                         const Vector* phi_mask) {
  Tape::Var pu = tape.row_param(p.user_shared, g.user_shared, u);
  if (!flags.freeze_offsets) {
    const int dd = static_cast<int>(d);
    pu = tape.add(pu, tape.row_param(p.user_offset[dd], g.user_offset[dd], u));
  }
  Tape::Var qj = tape.row_param(p.items, g.items, j);
  Tape::Var phi = tape.hadamard(pu, qj);
  if (phi_mask) phi = tape.mask_mul(phi, *phi_mask);
  if (flags.freeze_head) return tape.sum(phi);
  return tape.dot(phi, tape.vec_param(p.head, g.head));
}

}  // namespace crossrec
