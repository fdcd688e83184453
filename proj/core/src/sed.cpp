#include "crossrec/sed.hpp"

#include <stdexcept>

#include "crossrec/dropout.hpp"

namespace crossrec {

std::vector<std::size_t> sed_hidden_widths(std::size_t k, std::size_t half) {
  std::vector<std::size_t> widths(half);
  for (std::size_t i = 0; i < half; ++i) widths[i] = k << (half - 1 - i);
  return widths;
}

SedParams make_sed_params(std::size_t n_source, std::size_t n_target, std::size_t n_items,
                          std::size_t k, std::size_t L) {
  if (L < 2 || L % 2 != 0) throw std::invalid_argument("make_sed_params: L must be even, >= 2");
  const std::size_t half = L / 2;
  const auto widths = sed_hidden_widths(k, half);

  SedParams p;
  std::size_t in = n_source;
  for (auto w : widths) {
    p.encoder.push_back({DenseMatrix(w, in), Vector(w, 0.0)});
    in = w;
  }
  // decoder mirrors the encoder widths, final layer lands on n_T
  in = k;
  for (std::size_t l = 0; l + 1 < half; ++l) {
    const std::size_t w = widths[half - 2 - l];
    p.decoder.push_back({DenseMatrix(w, in), Vector(w, 0.0)});
    in = w;
  }
  p.decoder.push_back({DenseMatrix(n_target, in), Vector(n_target, 0.0)});
  in = k;
  for (auto w : widths) {
    p.tower.push_back({DenseMatrix(w, in), Vector(w, 0.0)});
    in = w;
  }
  p.items = DenseMatrix(n_items, k);
  p.head.assign(k, 0.0);
  return p;
}

Vector encode_user(const SedParams& p, std::span<const double> source_row) {
  Vector z(source_row.begin(), source_row.end());
  for (const auto& layer : p.encoder)
    z = affine_forward(z, layer.W, layer.b, ActivationKind::Sigmoid);
  return z;
}

Vector decode_user(const SedParams& p, std::span<const double> z, double gamma_max) {
  Vector h(z.begin(), z.end());
  for (std::size_t l = 0; l + 1 < p.decoder.size(); ++l)
    h = affine_forward(h, p.decoder[l].W, p.decoder[l].b, ActivationKind::Sigmoid);
  const auto& last = p.decoder.back();
  h = affine_forward(h, last.W, last.b, ActivationKind::Sigmoid);
  for (double& v : h) v *= gamma_max;
  return h;
}

Vector item_embed(const SedParams& p, std::uint32_t j) {
  auto row = p.items.row(j);
  Vector z(row.begin(), row.end());
  for (const auto& layer : p.tower)
    z = affine_forward(z, layer.W, layer.b, ActivationKind::Sigmoid);
  return z;
}

double sed_logit(const SedParams& p, std::span<const double> user_embed,
                 std::span<const double> item_embed) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.head.size(); ++i)
    s += user_embed[i] * item_embed[i] * p.head[i];
  return s;
}

double sed_predict(const SedParams& p, std::span<const double> source_row, std::uint32_t j,
                   double gamma_max) {
  const Vector pu = encode_user(p, source_row);
  const Vector qj = item_embed(p, j);
  return gamma_max * activate(sed_logit(p, pu, qj), ActivationKind::Sigmoid);
}

namespace {

Tape::Var stack_var(Tape& tape, const std::vector<AffineLayer>& layers,
                    std::vector<AffineLayer>& grads, Tape::Var z, DropoutCtx dropout,
                    bool scaled_final, double gamma_max) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    z = tape.add_bias(tape.matvec_param(layers[l].W, grads[l].W, z), layers[l].b, grads[l].b);
    z = tape.activate(z, ActivationKind::Sigmoid);
    const bool last = l + 1 == layers.size();
    if (last && scaled_final) {
      z = tape.scale(z, gamma_max);
    } else if (!last && dropout.active()) {
      z = tape.mask_mul(z, dropout_mask(tape.value(z).size(), dropout.rate, *dropout.rng));
    }
  }
  return z;
}

}  // namespace

Tape::Var sed_encode_var(Tape& tape, const SedParams& p, SedParams& g, Vector source_row,
                         DropoutCtx dropout) {
  Tape::Var z = tape.input(std::move(source_row));
  return stack_var(tape, p.encoder, g.encoder, z, dropout, false, 0.0);
}

Tape::Var sed_decode_var(Tape& tape, const SedParams& p, SedParams& g, Tape::Var z,
                         double gamma_max, DropoutCtx dropout) {
  return stack_var(tape, p.decoder, g.decoder, z, dropout, true, gamma_max);
}

Tape::Var sed_item_var(Tape& tape, const SedParams& p, SedParams& g, std::uint32_t j,
                       DropoutCtx dropout) {
  Tape::Var z = tape.row_param(p.items, g.items, j);
  return stack_var(tape, p.tower, g.tower, z, dropout, false, 0.0);
}

Tape::Var sed_logit_var(Tape& tape, const SedParams& p, SedParams& g, Tape::Var user_embed,
                        Tape::Var item_embed, DropoutCtx dropout) {
  Tape::Var phi = tape.hadamard(user_embed, item_embed);
  if (dropout.active())
    phi = tape.mask_mul(phi, dropout_mask(tape.value(phi).size(), dropout.rate, *dropout.rng));
  return tape.dot(phi, tape.vec_param(p.head, g.head));
}

}  // namespace crossrec
