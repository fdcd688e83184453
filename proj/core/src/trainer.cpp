#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "crossrec/dropout.hpp"
#include "crossrec/neucdcf.hpp"
#include "crossrec/rmsprop.hpp"

namespace crossrec {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Pmf: return "pmf";
    case ModelKind::Gmf: return "gmf";
    case ModelKind::GmfCd: return "gmf_cd";
    case ModelKind::Cmf: return "cmf";
    case ModelKind::Gcmf: return "gcmf";
    case ModelKind::Sed: return "sed";
    case ModelKind::Neucdcf: return "neucdcf";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "pmf") return ModelKind::Pmf;
  if (s == "gmf") return ModelKind::Gmf;
  if (s == "gmf_cd") return ModelKind::GmfCd;
  if (s == "cmf") return ModelKind::Cmf;
  if (s == "gcmf") return ModelKind::Gcmf;
  if (s == "sed") return ModelKind::Sed;
  if (s == "neucdcf") return ModelKind::Neucdcf;
  throw std::invalid_argument("unknown model kind: " + s);
}

void TrainConfig::validate() const {
  if (k == 0) throw std::invalid_argument("TrainConfig: k must be positive");
  if (lr < 0.0) throw std::invalid_argument("TrainConfig: lr must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch size must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("TrainConfig: dropout must be in [0,1)");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("TrainConfig: alpha in [0,1]");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (rho <= 0.0 || rho >= 1.0) throw std::invalid_argument("TrainConfig: rho in (0,1)");
  if (eps <= 0.0) throw std::invalid_argument("TrainConfig: eps must be positive");
  if (L < 2 || L % 2 != 0) throw std::invalid_argument("TrainConfig: L must be even, >= 2");
  if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
}

namespace {

GcmfMode gcmf_mode_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::Pmf: return GcmfMode::Pmf;
    case ModelKind::Gmf: return GcmfMode::Gmf;
    case ModelKind::GmfCd: return GcmfMode::GmfCd;
    case ModelKind::Cmf: return GcmfMode::Cmf;
    default: return GcmfMode::Full;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt));
}

void fill_normal(Vector& v, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (double& x : v) x = normal(rng);
}

}  // namespace

Model make_model(ModelKind kind, std::size_t num_users, std::size_t n_source,
                 std::size_t n_target, double gamma_max, const TrainConfig& cfg) {
  Model m;
  m.kind = kind;
  m.alpha = cfg.alpha;
  m.gamma_max = gamma_max;
  m.n_source = n_source;
  m.scale_encoder_input = cfg.scale_encoder_input;
  m.flags = gcmf_flags(gcmf_mode_of(kind));
  const std::size_t n_items = n_source + n_target;
  if (uses_gcmf(kind)) m.gcmf = make_gcmf_params(num_users, n_items, cfg.k);
  if (uses_sed(kind)) m.sed = make_sed_params(n_source, n_target, n_items, cfg.k, cfg.L);
  return m;
}

std::vector<Vector*> trainable_tensors(Model& model) {
  std::vector<Vector*> out;
  if (uses_gcmf(model.kind)) {
    out.push_back(&model.gcmf.user_shared.data());
    if (!model.flags.freeze_offsets) {
      out.push_back(&model.gcmf.user_offset[0].data());
      out.push_back(&model.gcmf.user_offset[1].data());
    }
    out.push_back(&model.gcmf.items.data());
    if (!model.flags.freeze_head) out.push_back(&model.gcmf.head);
  }
  if (uses_sed(model.kind)) {
    for (auto* stack : {&model.sed.encoder, &model.sed.decoder, &model.sed.tower})
      for (auto& layer : *stack) {
        out.push_back(&layer.W.data());
        out.push_back(&layer.b);
      }
    out.push_back(&model.sed.items.data());
    out.push_back(&model.sed.head);
  }
  return out;
}

Model clone_shapes(const Model& model) {
  Model g = model;
  for (Vector* t : trainable_tensors(g)) std::fill(t->begin(), t->end(), 0.0);
  return g;
}

void init_model(Model& model, std::mt19937_64& rng) {
  const double stddev = 0.002;
  for (Vector* t : trainable_tensors(model)) fill_normal(*t, stddev, rng);
  if (uses_gcmf(model.kind)) {
    if (model.flags.freeze_offsets) {
      model.gcmf.user_offset[0].fill(0.0);
      model.gcmf.user_offset[1].fill(0.0);
    }
    if (model.flags.freeze_head) std::fill(model.gcmf.head.begin(), model.gcmf.head.end(), 1.0);
  }
}

double fuse_predict(const Model& model, std::uint32_t u, std::uint32_t j, Domain d,
                    std::span<const double> sed_user_embed,
                    std::span<const double> sed_item_embed, bool cold_start) {
  const double lg = gcmf_logit(model.gcmf, model.flags, u, j, d, cold_start);
  const double ls = sed_logit(model.sed, sed_user_embed, sed_item_embed);
  const double logit = (1.0 - model.alpha) * lg + model.alpha * ls;
  return model.gamma_max * activate(logit, ActivationKind::Sigmoid);
}

Predictor::Predictor(const Model& model, const CrossDomainDataset& ds) : model_(model) {
  if (uses_sed(model.kind)) {
    user_embeds_.resize(ds.num_users());
    for (std::uint32_t u = 0; u < ds.num_users(); ++u)
      user_embeds_[u] = encode_user(model.sed, ds.source_row(u, model.scale_encoder_input));
    item_embeds_.resize(ds.num_items());
    for (std::uint32_t j = 0; j < ds.num_items(); ++j)
      item_embeds_[j] = item_embed(model.sed, j);
  }
}

double Predictor::predict(std::uint32_t u, std::uint32_t j, Domain d, bool cold_start) const {
  switch (model_.kind) {
    case ModelKind::Sed:
      return model_.gamma_max *
             activate(sed_logit(model_.sed, user_embeds_[u], item_embeds_[j]),
                      ActivationKind::Sigmoid);
    case ModelKind::Neucdcf:
      return fuse_predict(model_, u, j, d, user_embeds_[u], item_embeds_[j], cold_start);
    default:
      return gcmf_predict(model_.gcmf, model_.flags, u, j, d, model_.gamma_max, cold_start);
  }
}

std::vector<std::size_t> training_indices(const CrossDomainDataset& ds, ModelKind kind) {
  const bool single = uses_gcmf(kind) && gcmf_flags(gcmf_mode_of(kind)).single_domain;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.triples.size(); ++i) {
    const auto& t = ds.triples[i];
    if (!ds.trains(t)) continue;
    if (single && t.domain != Domain::Target) continue;
    idx.push_back(i);
  }
  return idx;
}

BatchStats batch_stats(const CrossDomainDataset& ds,
                       const std::vector<std::size_t>& train_idx) {
  BatchStats s;
  s.omega_train = train_idx.size();
  s.omega_target_train = ds.num_target_train();
  s.user_train_counts.assign(ds.num_users(), 0);
  for (auto i : train_idx) ++s.user_train_counts[ds.triples[i].user];
  return s;
}

namespace {

// Weight of user u's masked row loss inside one batch, chosen so that the
// batch terms summed over an epoch carry the same |omega|/B inflation as the
// per-batch mean prediction loss. With a single full batch this reduces to
// 1/|omega_T| exactly.
double s2t_weight(const BatchStats& stats, std::size_t batch_size, std::size_t in_batch,
                  std::size_t user_count) {
  return (static_cast<double>(stats.omega_train) /
          (static_cast<double>(batch_size) * static_cast<double>(stats.omega_target_train))) *
         (static_cast<double>(in_batch) / static_cast<double>(user_count));
}

}  // namespace

double batch_loss_and_grads(const Model& model, Model& grads, const CrossDomainDataset& ds,
                            std::span<const std::size_t> batch, const BatchStats& stats,
                            double lambda, DropoutCtx dropout) {
  if (batch.empty()) throw std::invalid_argument("batch_loss_and_grads: empty batch");
  for (Vector* t : trainable_tensors(grads)) std::fill(t->begin(), t->end(), 0.0);

  Tape tape;
  const bool sed_on = uses_sed(model.kind);
  const bool gcmf_on = uses_gcmf(model.kind);
  // dropout on the wide interaction vector only for the sigmoid-headed modes
  const bool gcmf_dropout = gcmf_on && model.flags.final_act == ActivationKind::Sigmoid &&
                            dropout.active();

  std::unordered_map<std::uint32_t, Tape::Var> user_vars, item_vars;
  std::vector<std::uint32_t> user_order;
  std::unordered_map<std::uint32_t, std::size_t> user_in_batch;

  std::vector<Tape::Var> preds;
  Vector targets;
  for (auto i : batch) {
    const auto& t = ds.triples[i];
    Tape::Var logit;
    Tape::Var glogit = 0;
    if (gcmf_on) {
      Vector mask;
      const Vector* mask_ptr = nullptr;
      if (gcmf_dropout) {
        mask = dropout_mask(model.gcmf.dim(), dropout.rate, *dropout.rng);
        mask_ptr = &mask;
      }
      glogit = gcmf_logit_var(tape, model.gcmf, grads.gcmf, model.flags, t.user, t.item,
                              t.domain, mask_ptr);
    }
    if (sed_on) {
      auto uit = user_vars.find(t.user);
      if (uit == user_vars.end()) {
        Tape::Var uv = sed_encode_var(tape, model.sed, grads.sed,
                                      ds.source_row(t.user, model.scale_encoder_input), dropout);
        uit = user_vars.emplace(t.user, uv).first;
        user_order.push_back(t.user);
      }
      auto iit = item_vars.find(t.item);
      if (iit == item_vars.end())
        iit = item_vars.emplace(t.item, sed_item_var(tape, model.sed, grads.sed, t.item, dropout))
                  .first;
      Tape::Var slogit =
          sed_logit_var(tape, model.sed, grads.sed, uit->second, iit->second, dropout);
      logit = gcmf_on ? tape.combine(1.0 - model.alpha, glogit, model.alpha, slogit) : slogit;
    } else {
      logit = glogit;
    }
    if (sed_on) ++user_in_batch[t.user];

    Tape::Var pred = (model.flags.final_act == ActivationKind::Identity && !sed_on)
                         ? logit
                         : tape.scale(tape.activate(logit, ActivationKind::Sigmoid),
                                      model.gamma_max);
    preds.push_back(pred);
    targets.push_back(t.value);
  }

  Tape::Var loss =
      tape.sq_error(preds, targets, 1.0 / static_cast<double>(batch.size()));

  if (sed_on && stats.omega_target_train > 0) {
    std::vector<Tape::Var> row_losses;
    Vector weights;
    DropoutCtx dec_dropout = dropout;
    for (auto u : user_order) {
      Tape::Var dec =
          sed_decode_var(tape, model.sed, grads.sed, user_vars[u], model.gamma_max, dec_dropout);
      row_losses.push_back(tape.masked_sq_norm(dec, ds.target_train_row(u)));
      weights.push_back(
          s2t_weight(stats, batch.size(), user_in_batch[u], stats.user_train_counts[u]));
    }
    loss = tape.add(loss, tape.weighted_sum(row_losses, weights));
  }

  double value = tape.value_scalar(loss);
  if (!std::isfinite(value))
    throw std::runtime_error("batch_loss_and_grads: nonfinite loss (diverged)");
  tape.backward(loss);

  if (lambda > 0.0) {
    Model& mut = const_cast<Model&>(model);  // read-only access to tensor list
    auto pts = trainable_tensors(mut);
    auto gts = trainable_tensors(grads);
    double reg = 0.0;
    for (std::size_t t = 0; t < pts.size(); ++t) {
      const Vector& p = *pts[t];
      Vector& g = *gts[t];
      for (std::size_t i = 0; i < p.size(); ++i) {
        reg += p[i] * p[i];
        g[i] += 2.0 * lambda * p[i];
      }
    }
    value += lambda * reg;
  }
  return value;
}

double batch_loss(const Model& model, const CrossDomainDataset& ds,
                  std::span<const std::size_t> batch, const BatchStats& stats, double lambda) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  const bool sed_on = uses_sed(model.kind);
  const bool gcmf_on = uses_gcmf(model.kind);

  std::unordered_map<std::uint32_t, Vector> user_embeds;
  std::unordered_map<std::uint32_t, Vector> item_embeds;
  std::vector<std::uint32_t> user_order;
  std::unordered_map<std::uint32_t, std::size_t> user_in_batch;

  double pred_loss = 0.0;
  for (auto i : batch) {
    const auto& t = ds.triples[i];
    double pred;
    if (sed_on) {
      auto uit = user_embeds.find(t.user);
      if (uit == user_embeds.end()) {
        uit = user_embeds
                  .emplace(t.user, encode_user(model.sed,
                                               ds.source_row(t.user, model.scale_encoder_input)))
                  .first;
        user_order.push_back(t.user);
      }
      auto iit = item_embeds.find(t.item);
      if (iit == item_embeds.end())
        iit = item_embeds.emplace(t.item, item_embed(model.sed, t.item)).first;
      ++user_in_batch[t.user];
      if (gcmf_on) {
        pred = fuse_predict(model, t.user, t.item, t.domain, uit->second, iit->second, false);
      } else {
        pred = model.gamma_max *
               activate(sed_logit(model.sed, uit->second, iit->second), ActivationKind::Sigmoid);
      }
    } else {
      pred = gcmf_predict(model.gcmf, model.flags, t.user, t.item, t.domain, model.gamma_max);
    }
    const double d = pred - t.value;
    pred_loss += d * d;
  }
  double loss = pred_loss / static_cast<double>(batch.size());

  if (sed_on && stats.omega_target_train > 0) {
    for (auto u : user_order) {
      const Vector dec = decode_user(model.sed, user_embeds[u], model.gamma_max);
      const Vector truth = ds.target_train_row(u);
      double s = 0.0;
      for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] > 0.0) {
          const double d = dec[i] - truth[i];
          s += d * d;
        }
      loss += s2t_weight(stats, batch.size(), user_in_batch[u], stats.user_train_counts[u]) * s;
    }
  }

  if (lambda > 0.0) {
    Model& mut = const_cast<Model&>(model);
    double reg = 0.0;
    for (Vector* t : trainable_tensors(mut))
      for (double x : *t) reg += x * x;
    loss += lambda * reg;
  }
  return loss;
}

TrainResult train(ModelKind kind, const CrossDomainDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (!ds.split_applied) throw std::logic_error("train: dataset has no split");

  const auto train_idx = training_indices(ds, kind);
  if (train_idx.empty()) throw std::runtime_error("train: empty training set");
  const auto stats = batch_stats(ds, train_idx);

  std::vector<std::size_t> val_idx;
  const std::size_t n_s = ds.num_source_items();
  for (std::size_t i = 0; i < ds.triples.size(); ++i)
    if (ds.triples[i].domain == Domain::Target &&
        ds.triples[i].label == SplitLabel::Validation)
      val_idx.push_back(i);

  Model model = make_model(kind, ds.num_users(), n_s, ds.num_target_items(), ds.gamma_max, cfg);
  std::mt19937_64 init_rng(cfg.seed);
  init_model(model, init_rng);

  Model grads = clone_shapes(model);
  auto params = trainable_tensors(model);
  auto grad_tensors = trainable_tensors(grads);
  std::vector<OptimizerState> opt;
  for (Vector* p : params) opt.emplace_back(p->size(), cfg.rho, cfg.eps, cfg.lr);

  TrainResult result;
  Model best = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t stall = 0;
  std::string stop_reason = "max_epochs";

  std::vector<std::size_t> order = train_idx;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0x50000000ULL + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 dropout_rng(derive_seed(cfg.seed, 0xd20b0000ULL + epoch));
    DropoutCtx dropout{cfg.dropout, cfg.dropout > 0.0 ? &dropout_rng : nullptr};

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      epoch_loss +=
          batch_loss_and_grads(model, grads, ds, batch, stats, cfg.lambda, dropout);
      ++n_batches;
      for (std::size_t t = 0; t < params.size(); ++t) {
        if (cfg.optimizer == OptimizerKind::RmsProp)
          rmsprop_step(*params[t], *grad_tensors[t], opt[t]);
        else
          sgd_step(*params[t], *grad_tensors[t], cfg.lr);
      }
    }
    epoch_loss /= static_cast<double>(n_batches);

    double val_mae = std::numeric_limits<double>::quiet_NaN();
    if (!val_idx.empty()) {
      Predictor pred(model, ds);
      double abs_sum = 0.0;
      for (auto i : val_idx) {
        const auto& t = ds.triples[i];
        abs_sum += std::abs(pred.predict(t.user, t.item, Domain::Target) - t.value);
      }
      val_mae = abs_sum / static_cast<double>(val_idx.size());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back({epoch, epoch_loss, val_mae, seconds});

    if (std::isfinite(val_mae) && val_mae < best_val) {
      best_val = val_mae;
      best = model;
      best_epoch = epoch;
      stall = 0;
    } else {
      ++stall;
      if (stall >= cfg.patience) {
        stop_reason = "early_stop";
        break;
      }
    }
  }

  if (best_epoch > 0) {
    result.model = std::move(best);
  } else {
    result.model = std::move(model);
    best_epoch = result.log.size();
    best_val = result.log.empty() ? 0.0 : result.log.back().val_mae;
  }
  result.best_epoch = best_epoch;
  result.best_val_mae = best_val;
  result.stop_reason = stop_reason;
  return result;
}

}  // namespace crossrec
