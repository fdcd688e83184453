#pragma once

#include <array>
#include <cstdint>

#include "crossrec/activation.hpp"
#include "crossrec/dense_matrix.hpp"
#include "crossrec/dataset.hpp"
#include "crossrec/tape.hpp"

namespace crossrec {

/// Reduction modes of the wide network. cmf freezes the head to ones and the
/// domain offsets to zero; gmf additionally restricts training to the target
/// domain; pmf is both restrictions with an identity output head.
enum class GcmfMode { Full, Cmf, Gmf, Pmf, GmfCd };

struct GcmfFlags {
  bool freeze_offsets = false;  // P^delta pinned to zero, not trained
  bool freeze_head = false;     // head pinned to all-ones, not trained
  bool single_domain = false;   // train on target-domain ratings only
  ActivationKind final_act = ActivationKind::Sigmoid;
};

GcmfFlags gcmf_flags(GcmfMode mode);
GcmfMode gcmf_mode_from_string(const std::string& s);
std::string to_string(GcmfMode mode);

/// Wide-network parameters: shared user embeddings, one offset matrix per
/// domain, collective item embeddings over the unified item index space, and
/// the prediction head.
struct GcmfParams {
  DenseMatrix user_shared;                 // m x k
  std::array<DenseMatrix, 2> user_offset;  // per domain, m x k
  DenseMatrix items;                       // (n_S + n_T) x k
  Vector head;                             // k

  std::size_t dim() const { return head.size(); }
};

GcmfParams make_gcmf_params(std::size_t num_users, std::size_t num_items, std::size_t k);

/// p_u = p_u^shared + p_u^offset(domain). Cold-start evaluation zeroes the
/// offset, i.e. returns the shared embedding alone.
Vector gcmf_user_embed(const GcmfParams& p, std::uint32_t u, Domain d, bool zero_offset);

double gcmf_logit(const GcmfParams& p, const GcmfFlags& flags, std::uint32_t u,
                  std::uint32_t j, Domain d, bool cold_start);

double gcmf_predict(const GcmfParams& p, const GcmfFlags& flags, std::uint32_t u,
                    std::uint32_t j, Domain d, double gamma_max, bool cold_start = false);

/// Tape node for the pre-activation score of one (u, j) pair. Gradients
/// accumulate into `g` (same shapes as `p`). `phi_mask` is an optional
/// dropout mask over the interaction vector.
Tape::Var gcmf_logit_var(Tape& tape, const GcmfParams& p, GcmfParams& g,
                         const GcmfFlags& flags, std::uint32_t u, std::uint32_t j, Domain d,
                         const Vector* phi_mask = nullptr);

}  // namespace crossrec
