#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossrec/dense_matrix.hpp"

namespace crossrec {

enum class Domain : int { Source = 0, Target = 1 };
enum class SplitLabel : std::uint8_t { Train = 0, Validation = 1, Test = 2 };

struct Rating {
  std::uint32_t user;
  std::uint32_t item;
  double value;
};

/// One domain's ratings with dense contiguous user/item indices and the
/// rating-scale bounds. 0 is reserved for "unobserved", so gamma_min > 0.
struct RatingsDataset {
  std::vector<std::string> user_ids;  // dense index -> external id
  std::vector<std::string> item_ids;
  std::vector<Rating> triples;
  double gamma_min = 1.0;
  double gamma_max = 5.0;

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_items() const { return item_ids.size(); }
};

struct ProtocolSpec {
  enum class Kind { Sparse, ColdStart, FullColdStart };
  Kind kind = Kind::Sparse;
  double K = 0.0;  // percent
  std::uint64_t seed = 0;
};

std::string to_string(ProtocolSpec::Kind k);
ProtocolSpec::Kind protocol_kind_from_string(const std::string& s);

struct CrossTriple {
  std::uint32_t user;
  std::uint32_t item;  // unified index: source items [0,nS), target items [nS,nS+nT)
  double value;
  Domain domain;
  SplitLabel label = SplitLabel::Train;
  bool removed = false;  // dropped from training by sparsify / full_cold_start
};

/// Source and target domains aligned over a shared user set. Item indices
/// live in one unified space so collective item embeddings can index either
/// domain directly.
struct CrossDomainDataset {
  std::vector<std::string> user_ids;
  std::vector<std::string> source_item_ids;
  std::vector<std::string> target_item_ids;
  std::vector<CrossTriple> triples;
  double gamma_min = 1.0;
  double gamma_max = 5.0;

  bool split_applied = false;
  std::uint64_t split_seed = 0;
  ProtocolSpec protocol;
  std::vector<std::uint32_t> full_cold_users;

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_source_items() const { return source_item_ids.size(); }
  std::size_t num_target_items() const { return target_item_ids.size(); }
  std::size_t num_items() const { return source_item_ids.size() + target_item_ids.size(); }
  bool is_target_item(std::uint32_t item) const { return item >= num_source_items(); }

  /// Training-visible triple: train-labeled and not removed by a protocol.
  bool trains(const CrossTriple& t) const {
    return t.label == SplitLabel::Train && !t.removed;
  }

  /// Per-user count of training-visible target ratings.
  std::vector<std::size_t> target_train_counts() const;
  std::size_t num_target_train() const;

  /// Dense source-domain rating row for one user (all sources are train).
  /// Entries are optionally scaled by 1/gamma_max.
  Vector source_row(std::uint32_t user, bool scaled) const;

  /// Dense target-domain train-rating row (length n_T, 0 = unobserved).
  Vector target_train_row(std::uint32_t user) const;
};

RatingsDataset load_ratings(const std::string& path, double gamma_min, double gamma_max);

CrossDomainDataset align_domains(const RatingsDataset& src, const RatingsDataset& tgt,
                                 std::size_t min_ratings);

struct SplitFractions {
  double train = 0.65;
  double validation = 0.15;
  double test = 0.20;
};

void split(CrossDomainDataset& ds, SplitFractions fractions, std::uint64_t seed);

void sparsify(CrossDomainDataset& ds, double K, std::uint64_t seed);

std::vector<std::uint32_t> cold_start_users(const CrossDomainDataset& ds);

/// Removes all target-train ratings of floor(K% * m) users; returns them.
std::vector<std::uint32_t> full_cold_start(CrossDomainDataset& ds, double K, std::uint64_t seed);

/// Applies the protocol's sparsify / full-cold-start mutation after split.
void apply_protocol(CrossDomainDataset& ds, const ProtocolSpec& protocol);

void save_manifest(const CrossDomainDataset& ds, const std::string& path);
CrossDomainDataset load_manifest(const std::string& path);

}  // namespace crossrec
