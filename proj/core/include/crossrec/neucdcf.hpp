#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crossrec/dataset.hpp"
#include "crossrec/gcmf.hpp"
#include "crossrec/sed.hpp"

namespace crossrec {

enum class ModelKind { Pmf, Gmf, GmfCd, Cmf, Gcmf, Sed, Neucdcf };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

inline bool uses_gcmf(ModelKind k) { return k != ModelKind::Sed; }
inline bool uses_sed(ModelKind k) { return k == ModelKind::Sed || k == ModelKind::Neucdcf; }

enum class OptimizerKind { RmsProp, Sgd };

struct TrainConfig {
  std::size_t k = 8;
  double alpha = 0.5;
  double lr = 0.005;
  std::size_t batch_size = 512;
  double dropout = 0.5;
  std::size_t max_epochs = 120;
  std::size_t patience = 10;
  double lambda = 0.0;
  double rho = 0.9;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t L = 6;
  OptimizerKind optimizer = OptimizerKind::RmsProp;
  bool scale_encoder_input = true;

  void validate() const;
};

/// A trained (or trainable) model of any kind. The unused network's
/// parameter block stays empty.
struct Model {
  ModelKind kind = ModelKind::Gcmf;
  double alpha = 0.5;  // only read by Neucdcf
  double gamma_max = 5.0;
  std::size_t n_source = 0;
  bool scale_encoder_input = true;
  GcmfFlags flags;
  GcmfParams gcmf;
  SedParams sed;
};

/// Allocates zeroed parameters of the right shapes.
Model make_model(ModelKind kind, std::size_t num_users, std::size_t n_source,
                 std::size_t n_target, double gamma_max, const TrainConfig& cfg);

/// N(0, 0.002^2) initialization in a fixed tensor order; frozen offsets
/// stay zero and a frozen head is pinned to all-ones.
void init_model(Model& model, std::mt19937_64& rng);

/// Trainable tensors in a stable order (shared across a model and its
/// same-shape gradient holder).
std::vector<Vector*> trainable_tensors(Model& model);
Model clone_shapes(const Model& model);

/// Fused wide+deep logit: (1-alpha) * gcmf + alpha * sed.
double fuse_predict(const Model& model, std::uint32_t u, std::uint32_t j, Domain d,
                    std::span<const double> sed_user_embed,
                    std::span<const double> sed_item_embed, bool cold_start);

/// Frozen-parameter predictor with cached SED user/item embeddings.
class Predictor {
 public:
  Predictor(const Model& model, const CrossDomainDataset& ds);
  double predict(std::uint32_t u, std::uint32_t j, Domain d, bool cold_start = false) const;

 private:
  const Model& model_;
  std::vector<Vector> user_embeds_;
  std::vector<Vector> item_embeds_;
};

/// Precomputed normalization constants for batched objectives.
struct BatchStats {
  std::size_t omega_train = 0;         // |train pool|
  std::size_t omega_target_train = 0;  // |target train| after protocol removals
  std::vector<std::size_t> user_train_counts;  // c_u over the train pool
};

std::vector<std::size_t> training_indices(const CrossDomainDataset& ds, ModelKind kind);
BatchStats batch_stats(const CrossDomainDataset& ds,
                       const std::vector<std::size_t>& train_idx);

/// Batched objective with analytic gradients (tape route). Returns the batch
/// loss; gradients accumulate into `grads` (zeroed here).
double batch_loss_and_grads(const Model& model, Model& grads, const CrossDomainDataset& ds,
                            std::span<const std::size_t> batch, const BatchStats& stats,
                            double lambda, DropoutCtx dropout);

/// Same objective evaluated forward-only through the inference path; used as
/// the finite-difference route and never touches the tape.
double batch_loss(const Model& model, const CrossDomainDataset& ds,
                  std::span<const std::size_t> batch, const BatchStats& stats, double lambda);

struct TrainLogEntry {
  std::size_t epoch;
  double loss;
  double val_mae;
  double seconds;
};

struct TrainResult {
  Model model;
  std::vector<TrainLogEntry> log;
  std::size_t best_epoch = 0;
  double best_val_mae = 0.0;
  std::string stop_reason;
};

TrainResult train(ModelKind kind, const CrossDomainDataset& ds, const TrainConfig& cfg);

}  // namespace crossrec
