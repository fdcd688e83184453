#include <benchmark/benchmark.h>

#include <random>

#include "crossrec/neucdcf.hpp"
#include "crossrec/rmsprop.hpp"

using namespace crossrec;

namespace {

CrossDomainDataset make_data(std::size_t m, std::size_t ns, std::size_t nt) {
  CrossDomainDataset ds;
  for (std::size_t u = 0; u < m; ++u) ds.user_ids.push_back("u" + std::to_string(u));
  for (std::size_t j = 0; j < ns; ++j) ds.source_item_ids.push_back("s" + std::to_string(j));
  for (std::size_t j = 0; j < nt; ++j) ds.target_item_ids.push_back("t" + std::to_string(j));
  for (std::uint32_t u = 0; u < m; ++u)
    for (std::uint32_t step = 0; step < 12; ++step) {
      const auto js = static_cast<std::uint32_t>((u * 5 + step * 7) % ns);
      const auto jt = static_cast<std::uint32_t>(ns + (u * 3 + step * 11) % nt);
      ds.triples.push_back({u, js, 1.0 + (u + step) % 5, Domain::Source});
      ds.triples.push_back({u, jt, 1.0 + (u * 2 + step) % 5, Domain::Target});
    }
  ds.split_applied = true;
  return ds;
}

Model make_random_model(ModelKind kind, const CrossDomainDataset& ds, const TrainConfig& cfg) {
  Model model = make_model(kind, ds.num_users(), ds.num_source_items(),
                           ds.num_target_items(), ds.gamma_max, cfg);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (Vector* t : trainable_tensors(model))
    for (double& v : *t) v = normal(rng);
  return model;
}

void BM_GcmfPredict(benchmark::State& state) {
  auto ds = make_data(256, 64, 64);
  TrainConfig cfg;
  cfg.k = static_cast<std::size_t>(state.range(0));
  auto model = make_random_model(ModelKind::Gcmf, ds, cfg);
  std::uint32_t u = 0, j = 64;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gcmf_predict(model.gcmf, model.flags, u, j, Domain::Target, model.gamma_max));
    u = (u + 1) % 256;
    j = 64 + (j + 1) % 64;
  }
}
BENCHMARK(BM_GcmfPredict)->Arg(8)->Arg(32)->Arg(64);

void BM_SedEncode(benchmark::State& state) {
  auto ds = make_data(256, 128, 128);
  TrainConfig cfg;
  cfg.k = 8;
  cfg.L = static_cast<std::size_t>(state.range(0));
  auto model = make_random_model(ModelKind::Sed, ds, cfg);
  const Vector row = ds.source_row(0, true);
  for (auto _ : state) benchmark::DoNotOptimize(encode_user(model.sed, row));
}
BENCHMARK(BM_SedEncode)->Arg(2)->Arg(6);

void BM_RmspropStep(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Vector param(n, 0.1), grad(n, 0.01);
  OptimizerState opt(n);
  for (auto _ : state) {
    rmsprop_step(param, grad, opt);
    benchmark::DoNotOptimize(param.data());
  }
}
BENCHMARK(BM_RmspropStep)->Arg(1 << 10)->Arg(1 << 16);

void BM_BatchGrads(benchmark::State& state) {
  auto ds = make_data(256, 64, 64);
  TrainConfig cfg;
  cfg.k = 8;
  cfg.L = 2;
  auto model = make_random_model(ModelKind::Neucdcf, ds, cfg);
  Model grads = clone_shapes(model);
  const auto idx = training_indices(ds, ModelKind::Neucdcf);
  const auto stats = batch_stats(ds, idx);
  const std::size_t B = std::min<std::size_t>(512, idx.size());
  std::span<const std::size_t> batch(idx.data(), B);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        batch_loss_and_grads(model, grads, ds, batch, stats, 0.0, {}));
  }
}
BENCHMARK(BM_BatchGrads);

}  // namespace

BENCHMARK_MAIN();
