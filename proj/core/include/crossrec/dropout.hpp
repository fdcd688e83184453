#pragma once

#include <random>
#include <stdexcept>

#include "crossrec/dense_matrix.hpp"

namespace crossrec {

/// Inverted-scaling dropout mask: entries are 0 with probability `rate`,
/// otherwise 1/(1-rate), so the mask has unit expectation and evaluation
/// needs no rescaling. rate == 1 yields an all-zero mask.
inline Vector dropout_mask(std::size_t n, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("dropout rate must be in [0,1]");
  Vector mask(n, 1.0);
  if (rate == 0.0) return mask;
  if (rate == 1.0) {
    std::fill(mask.begin(), mask.end(), 0.0);
    return mask;
  }
  const double keep = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) mask[i] = unif(rng) < rate ? 0.0 : keep;
  return mask;
}

}  // namespace crossrec
