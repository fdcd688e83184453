#include "crossrec/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <boost/math/distributions/students_t.hpp>

namespace crossrec {

double mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("mae: arrays must be nonempty and equal length");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(truth[i] - pred[i]);
  return s / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("rmse: arrays must be nonempty and equal length");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = truth[i] - pred[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired_t_test: need equal lengths >= 2");
  const auto n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);

  TTestResult r;
  if (var == 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    r.degenerate = true;
    return r;
  }
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  boost::math::students_t dist(static_cast<double>(n - 1));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

EvalResult evaluate(const Model& model, const CrossDomainDataset& ds,
                    const ProtocolSpec& protocol) {
  if (!ds.split_applied) throw std::logic_error("evaluate: split not applied");
  const bool cold = protocol.kind != ProtocolSpec::Kind::Sparse;

  std::unordered_set<std::uint32_t> user_filter;
  if (protocol.kind == ProtocolSpec::Kind::ColdStart) {
    for (auto u : cold_start_users(ds)) user_filter.insert(u);
  } else if (protocol.kind == ProtocolSpec::Kind::FullColdStart) {
    for (auto u : ds.full_cold_users) user_filter.insert(u);
  }

  Predictor predictor(model, ds);
  std::vector<double> preds, truths;
  for (const auto& t : ds.triples) {
    if (t.domain != Domain::Target || t.label != SplitLabel::Test) continue;
    if (protocol.kind != ProtocolSpec::Kind::Sparse && !user_filter.count(t.user)) continue;
    preds.push_back(predictor.predict(t.user, t.item, Domain::Target, cold));
    truths.push_back(t.value);
  }

  EvalResult r;
  r.cold_user_count = user_filter.size();
  r.count = preds.size();
  if (preds.empty()) {
    r.empty = true;
    return r;
  }
  r.mae = mae(preds, truths);
  r.rmse = rmse(preds, truths);
  return r;
}

EvalReport aggregate(const ProtocolSpec& protocol, const std::vector<EvalResult>& runs) {
  EvalReport rep;
  rep.protocol = protocol;
  for (const auto& r : runs) {
    if (r.empty) continue;
    rep.seed_mae.push_back(r.mae);
    rep.seed_rmse.push_back(r.rmse);
    rep.count += r.count;
    rep.cold_user_count += r.cold_user_count;
  }
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    if (v.empty()) {
      mean = sd = 0.0;
      return;
    }
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    sd = 0.0;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(sd / static_cast<double>(v.size() - 1)) : 0.0;
  };
  mean_std(rep.seed_mae, rep.mean_mae, rep.std_mae);
  mean_std(rep.seed_rmse, rep.mean_rmse, rep.std_rmse);
  return rep;
}

}  // namespace crossrec
