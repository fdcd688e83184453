#pragma once

// Synthetic dataset builders shared by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "crossrec/dataset.hpp"

namespace testutil {

using namespace crossrec;

// Random dataset over m users, ns source + nt target items, with coverage
// forced so every user rates at least one item per domain and every item is
// rated at least once. No split labels; callers run split() themselves.
inline CrossDomainDataset make_synthetic(std::size_t m, std::size_t ns, std::size_t nt,
                                         double density, std::uint64_t seed) {
  CrossDomainDataset ds;
  ds.gamma_min = 1.0;
  ds.gamma_max = 5.0;
  for (std::size_t u = 0; u < m; ++u) ds.user_ids.push_back("u" + std::to_string(u));
  for (std::size_t j = 0; j < ns; ++j) ds.source_item_ids.push_back("s" + std::to_string(j));
  for (std::size_t j = 0; j < nt; ++j) ds.target_item_ids.push_back("t" + std::to_string(j));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> rating(1, 5);

  auto add = [&](std::uint32_t u, std::uint32_t item, Domain d) {
    ds.triples.push_back({u, item, static_cast<double>(rating(rng)), d});
  };

  std::vector<bool> has(m * (ns + nt), false);
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t j = 0; j < ns + nt; ++j)
      if (unif(rng) < density) {
        has[u * (ns + nt) + j] = true;
        add(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(j),
            j < ns ? Domain::Source : Domain::Target);
      }
  // coverage: walk a diagonal so every user and every item gets a rating in
  // each domain it belongs to
  auto cover = [&](std::size_t base, std::size_t n, Domain d) {
    for (std::size_t step = 0; step < std::max(m, n); ++step) {
      const std::size_t u = step % m;
      const std::size_t j = base + step % n;
      if (!has[u * (ns + nt) + j]) {
        has[u * (ns + nt) + j] = true;
        add(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(j), d);
      }
    }
  };
  cover(0, ns, Domain::Source);
  cover(ns, nt, Domain::Target);
  return ds;
}

// Transfer-structured data: each user has a latent 2-vector z shared across
// domains. Source ratings are roughly bilinear in (z, item factor); target
// ratings pass the same latent signal through a saturating nonlinearity, so a
// model that reads the user's source row has information a target-only
// factorization lacks.
inline CrossDomainDataset make_transfer(std::size_t m, std::size_t ns, std::size_t nt,
                                        double density, std::uint64_t seed) {
  CrossDomainDataset ds;
  ds.gamma_min = 1.0;
  ds.gamma_max = 5.0;
  for (std::size_t u = 0; u < m; ++u) ds.user_ids.push_back("u" + std::to_string(u));
  for (std::size_t j = 0; j < ns; ++j) ds.source_item_ids.push_back("s" + std::to_string(j));
  for (std::size_t j = 0; j < nt; ++j) ds.target_item_ids.push_back("t" + std::to_string(j));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::array<double, 2>> zu(m), vs(ns), vt(nt);
  for (auto& z : zu) z = {normal(rng), normal(rng)};
  for (auto& v : vs) v = {normal(rng), normal(rng)};
  for (auto& v : vt) v = {normal(rng), normal(rng)};

  auto clamp_round = [](double x) {
    return std::min(5.0, std::max(1.0, std::round(x)));
  };
  auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  std::vector<bool> has(m * (ns + nt), false);
  auto add = [&](std::size_t u, std::size_t j) {
    if (has[u * (ns + nt) + j]) return;
    has[u * (ns + nt) + j] = true;
    double r;
    Domain d;
    if (j < ns) {
      r = clamp_round(3.0 + 1.3 * (zu[u][0] * vs[j][0] + zu[u][1] * vs[j][1]));
      d = Domain::Source;
    } else {
      const std::size_t t = j - ns;
      // saturating response to the shared latent signal
      const double score = zu[u][0] * vt[t][0] + zu[u][1] * vt[t][1] +
                           0.8 * std::tanh(zu[u][0] + zu[u][1]);
      r = clamp_round(1.0 + 4.0 * sigma(1.6 * score));
      d = Domain::Target;
    }
    ds.triples.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(j), r, d});
  };

  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t j = 0; j < ns + nt; ++j)
      if (unif(rng) < density) add(u, j);
  for (std::size_t step = 0; step < std::max(m, ns); ++step) add(step % m, step % ns);
  for (std::size_t step = 0; step < std::max(m, nt); ++step) add(step % m, ns + step % nt);
  return ds;
}

}  // namespace testutil
