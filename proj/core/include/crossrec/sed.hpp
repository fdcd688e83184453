#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "crossrec/activation.hpp"
#include "crossrec/dense_matrix.hpp"
#include "crossrec/tape.hpp"

namespace crossrec {

struct AffineLayer {
  DenseMatrix W;
  Vector b;
};

/// Stacked encoder-decoder parameters. The encoder maps a user's dense
/// source-domain rating row to a k-vector, the decoder reconstructs the
/// target-domain row, and the item tower maps collective item embeddings to
/// k-vectors. All hidden activations are sigmoid; the decoder's final layer
/// and the prediction head are gamma_max-scaled sigmoids.
struct SedParams {
  std::vector<AffineLayer> encoder;  // n_S -> ... -> k
  std::vector<AffineLayer> decoder;  // k -> ... -> n_T
  std::vector<AffineLayer> tower;    // k -> ... -> k
  DenseMatrix items;                 // (n_S + n_T) x k
  Vector head;                       // k

  std::size_t dim() const { return head.size(); }
  std::size_t depth() const { return encoder.size() + decoder.size(); }  // L
};

/// Hidden widths for a half-stack of `half` layers ending at k:
/// half=3 -> {4k, 2k, k}, half=1 -> {k}.
std::vector<std::size_t> sed_hidden_widths(std::size_t k, std::size_t half);

/// L must be even and >= 2; encoder/decoder get L/2 layers each, the tower
/// mirrors the encoder widths from a k-dim input.
SedParams make_sed_params(std::size_t n_source, std::size_t n_target, std::size_t n_items,
                          std::size_t k, std::size_t L);

/// Dropout applied during tape construction; disabled when rng is null.
struct DropoutCtx {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
  bool active() const { return rng != nullptr && rate > 0.0; }
};

Vector encode_user(const SedParams& p, std::span<const double> source_row);
Vector decode_user(const SedParams& p, std::span<const double> z, double gamma_max);
Vector item_embed(const SedParams& p, std::uint32_t j);
double sed_logit(const SedParams& p, std::span<const double> user_embed,
                 std::span<const double> item_embed);
double sed_predict(const SedParams& p, std::span<const double> source_row, std::uint32_t j,
                   double gamma_max);

Tape::Var sed_encode_var(Tape& tape, const SedParams& p, SedParams& g, Vector source_row,
                         DropoutCtx dropout);
Tape::Var sed_decode_var(Tape& tape, const SedParams& p, SedParams& g, Tape::Var z,
                         double gamma_max, DropoutCtx dropout);
Tape::Var sed_item_var(Tape& tape, const SedParams& p, SedParams& g, std::uint32_t j,
                       DropoutCtx dropout);
Tape::Var sed_logit_var(Tape& tape, const SedParams& p, SedParams& g, Tape::Var user_embed,
                        Tape::Var item_embed, DropoutCtx dropout);

}  // namespace crossrec
