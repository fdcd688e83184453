#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crossrec/dataset.hpp"
#include "crossrec/neucdcf.hpp"

namespace crossrec {

double mae(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero-variance differences
};

/// Two-sided paired Student t-test over per-seed metric pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// One model/protocol-instance evaluation over the protocol's test pairs.
struct EvalResult {
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
  std::size_t cold_user_count = 0;
  bool empty = false;
};

EvalResult evaluate(const Model& model, const CrossDomainDataset& ds,
                    const ProtocolSpec& protocol);

/// Per-protocol aggregate over repeated seeds, the shape of a results table
/// row.
struct EvalReport {
  ProtocolSpec protocol;
  std::vector<double> seed_mae;
  std::vector<double> seed_rmse;
  double mean_mae = 0.0;
  double std_mae = 0.0;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
  std::size_t count = 0;
  std::size_t cold_user_count = 0;
};

EvalReport aggregate(const ProtocolSpec& protocol, const std::vector<EvalResult>& runs);

}  // namespace crossrec
