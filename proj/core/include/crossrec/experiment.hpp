#pragma once

#include <string>
#include <vector>

#include "crossrec/dataset.hpp"
#include "crossrec/metrics.hpp"
#include "crossrec/neucdcf.hpp"

namespace crossrec {

/// One experiment: data sources, preprocessing thresholds, protocol, model,
/// training hyperparameters, and the repeat/seed policy.
struct ExperimentConfig {
  std::string source_path;
  std::string target_path;
  double gamma_min = 1.0;
  double gamma_max = 5.0;
  std::size_t min_ratings = 10;
  ProtocolSpec protocol;  // protocol.seed is derived per repeat
  std::string model = "neucdcf";
  TrainConfig train;
  std::string out_dir = "out";
  std::size_t repeats = 5;
  std::uint64_t base_seed = 0;

  void validate() const;
};

/// Keys use flat dotted names (e.g. "train.k"). Unknown keys are an error
/// listing the valid set; values arrive as strings so flag overrides and
/// file values share one path.
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config_file(const std::string& path);
std::vector<std::string> valid_config_keys();

/// FNV-1a hash of the canonical config serialization; embedded in outputs.
std::string config_hash(const ExperimentConfig& cfg);
std::string config_to_json_string(const ExperimentConfig& cfg);

/// Repeats: for seed in {base .. base+repeats-1}: split + protocol + train +
/// evaluate, persisting checkpoint/trainlog/report per run, then a summary
/// row aggregated across seeds. Returns 0 iff all runs completed. A failing
/// seed preserves the runs already written.
int run_experiment(const ExperimentConfig& cfg);

/// Same pipeline for every (alpha, k) in the grids; emits one summary row
/// per combination into sweep.csv, best row (by mean validation MAE) flagged.
int run_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas,
              const std::vector<std::size_t>& ks);

/// Aggregates per-run report.json files into one Table-shaped CSV.
void aggregate_reports(const std::vector<std::string>& report_paths, const std::string& out_csv);

/// Shortest round-trip decimal formatting, used for all numeric output so
/// re-runs are byte-identical.
std::string format_double(double v);

}  // namespace crossrec
