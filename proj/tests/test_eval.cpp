#include <cmath>
#include <set>

#include "doctest.h"

#include "crossrec/metrics.hpp"
#include "synthetic.hpp"

using namespace crossrec;

TEST_CASE("mae and rmse basics") {
  Vector a{3.0, 4.0}, b{5.0, 2.0};
  CHECK(mae(a, b) == 2.0);
  CHECK(rmse(a, b) == 2.0);
  Vector same{1.0, 2.0, 3.0};
  CHECK(mae(same, same) == 0.0);
  CHECK(rmse(same, same) == 0.0);
  Vector p{1.0, 5.0}, t{2.0, 1.0};
  CHECK(mae(p, t) == doctest::Approx(2.5));
  CHECK(rmse(p, t) == doctest::Approx(std::sqrt((1.0 + 16.0) / 2.0)));
  Vector empty;
  CHECK_THROWS_AS(mae(empty, empty), std::invalid_argument);
  Vector one{1.0};
  CHECK_THROWS_AS(mae(one, same), std::invalid_argument);
  CHECK_THROWS_AS(rmse(one, same), std::invalid_argument);
}

TEST_CASE("mae translation property") {
  Vector truth(10, 3.0);
  Vector pred(10, 3.0);
  const double base = mae(pred, truth);
  for (auto& v : pred) v += 0.75;
  CHECK(mae(pred, truth) == doctest::Approx(base + 0.75));
}

TEST_CASE("paired t-test textbook value") {
  // differences 1..5: mean 3, sample var 2.5, t = 3/sqrt(2.5/5) ~= 4.2426,
  // two-sided p at 4 degrees of freedom ~= 0.0132
  Vector a{1.0, 2.0, 3.0, 4.0, 5.0};
  Vector b(5, 0.0);
  const auto r = paired_t_test(a, b);
  CHECK_FALSE(r.degenerate);
  CHECK(r.t == doctest::Approx(3.0 / std::sqrt(2.5 / 5.0)).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(4.2426).epsilon(1e-4));
  CHECK(r.p == doctest::Approx(0.0132).epsilon(1e-2));
}

TEST_CASE("paired t-test degenerate cases") {
  Vector a{1.0, 2.0, 3.0};
  const auto same = paired_t_test(a, a);
  CHECK(same.degenerate);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  Vector b{0.0, 1.0, 2.0};  // constant difference of 1
  const auto shifted = paired_t_test(a, b);
  CHECK(shifted.degenerate);
  CHECK(std::isinf(shifted.t));
  CHECK(shifted.t > 0);
  CHECK(shifted.p == 0.0);

  Vector one{1.0};
  CHECK_THROWS_AS(paired_t_test(one, one), std::invalid_argument);
}

TEST_CASE("paired t-test antisymmetry") {
  Vector a{0.71, 0.69, 0.72, 0.68, 0.70};
  Vector b{0.66, 0.67, 0.69, 0.66, 0.68};
  const auto ab = paired_t_test(a, b);
  const auto ba = paired_t_test(b, a);
  CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));
  CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-12));
}

TEST_CASE("evaluate over the sparse protocol uses every test pair") {
  auto ds = testutil::make_synthetic(20, 8, 10, 0.5, 91);
  split(ds, SplitFractions{}, 14);
  TrainConfig cfg;
  cfg.k = 2;
  Model model = make_model(ModelKind::Gcmf, 20, 8, 10, ds.gamma_max, cfg);  // predicts 2.5

  std::size_t n_test = 0;
  double abs_sum = 0.0;
  for (const auto& t : ds.triples)
    if (t.domain == Domain::Target && t.label == SplitLabel::Test) {
      ++n_test;
      abs_sum += std::abs(2.5 - t.value);
    }
  const auto r = evaluate(model, ds, {ProtocolSpec::Kind::Sparse, 0.0, 0});
  CHECK_FALSE(r.empty);
  CHECK(r.count == n_test);
  CHECK(r.mae == doctest::Approx(abs_sum / static_cast<double>(n_test)).epsilon(1e-12));
  CHECK(r.mae <= ds.gamma_max);
}

TEST_CASE("cold-start evaluation filters users and zeroes the offset") {
  auto ds = testutil::make_synthetic(30, 10, 12, 0.4, 101);
  split(ds, SplitFractions{}, 21);
  apply_protocol(ds, {ProtocolSpec::Kind::Sparse, 80.0, 21});

  TrainConfig cfg;
  cfg.k = 2;
  Model model = make_model(ModelKind::Gcmf, 30, 10, 12, ds.gamma_max, cfg);
  // poison the target offsets: if the cold path read them, predictions
  // would saturate and shift the MAE
  model.gcmf.user_offset[1].fill(1000.0);
  model.gcmf.head = Vector(2, 1.0);

  const auto cold_users = cold_start_users(ds);
  const auto r = evaluate(model, ds, {ProtocolSpec::Kind::ColdStart, 80.0, 21});
  CHECK(r.cold_user_count == cold_users.size());
  // with zero shared embeddings the cold logit is 0 -> every prediction 2.5
  std::size_t n = 0;
  double abs_sum = 0.0;
  std::set<std::uint32_t> cold_set(cold_users.begin(), cold_users.end());
  for (const auto& t : ds.triples)
    if (t.domain == Domain::Target && t.label == SplitLabel::Test && cold_set.count(t.user)) {
      ++n;
      abs_sum += std::abs(2.5 - t.value);
    }
  CHECK(r.count == n);
  if (n > 0) CHECK(r.mae == doctest::Approx(abs_sum / static_cast<double>(n)).epsilon(1e-12));
}

TEST_CASE("full cold-start evaluation covers exactly the removed users") {
  auto ds = testutil::make_synthetic(40, 10, 14, 0.4, 111);
  split(ds, SplitFractions{}, 31);
  apply_protocol(ds, {ProtocolSpec::Kind::FullColdStart, 20.0, 31});
  TrainConfig cfg;
  cfg.k = 2;
  Model model = make_model(ModelKind::Gcmf, 40, 10, 14, ds.gamma_max, cfg);
  const auto r = evaluate(model, ds, {ProtocolSpec::Kind::FullColdStart, 20.0, 31});
  CHECK(r.cold_user_count == ds.full_cold_users.size());
  const auto counts = ds.target_train_counts();
  for (auto u : ds.full_cold_users) CHECK(counts[u] == 0);
}

TEST_CASE("empty evaluation sets are flagged, not fatal") {
  auto ds = testutil::make_synthetic(10, 5, 6, 0.8, 121);
  split(ds, SplitFractions{}, 41);
  // dense data, no sparsify: likely no cold users at all
  TrainConfig cfg;
  cfg.k = 2;
  Model model = make_model(ModelKind::Gcmf, 10, 5, 6, ds.gamma_max, cfg);
  const auto r = evaluate(model, ds, {ProtocolSpec::Kind::FullColdStart, 0.0, 1});
  CHECK(r.empty);
  CHECK(r.count == 0);
}

TEST_CASE("aggregate mean and standard deviation") {
  std::vector<EvalResult> runs;
  for (double m : {0.6, 0.7, 0.8}) runs.push_back({m, m + 0.1, 10, 2, false});
  runs.push_back({0.0, 0.0, 0, 0, true});  // empty runs are skipped
  const auto rep = aggregate({ProtocolSpec::Kind::Sparse, 0.0, 0}, runs);
  CHECK(rep.seed_mae.size() == 3);
  CHECK(rep.mean_mae == doctest::Approx(0.7));
  CHECK(rep.std_mae == doctest::Approx(0.1));
  CHECK(rep.mean_rmse == doctest::Approx(0.8));
  CHECK(rep.count == 30);

  const auto single = aggregate({ProtocolSpec::Kind::Sparse, 0.0, 0}, {runs[0]});
  CHECK(single.std_mae == 0.0);
}
