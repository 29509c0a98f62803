#pragma once

// Low-variance (systematic) resampling: one uniform offset, n_out equally
// spaced positions walked through the cumulative weights. A particle with
// weight w receives floor(n*w) or ceil(n*w) copies; uniform weights come
// back exactly once each.

#include <vector>

#include "scope/common.hpp"
#include "scope/rng.hpp"

namespace scope {

inline std::vector<std::size_t> systematic_resample_with_offset(
    const std::vector<double>& weights, std::size_t n_out, double u01) {
  if (weights.empty())
    throw InputError("systematic_resample: empty weight vector");
  if (!(u01 >= 0.0 && u01 < 1.0))
    throw InputError("systematic_resample: offset must be in [0,1)");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InputError("systematic_resample: weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0.0)
    throw InputError("systematic_resample: weights sum to zero");

  // particle i owns the half-open span [c_{i-1}, c_i) of cumulative weight,
  // so an offset of exactly zero still distributes copies proportionally
  std::vector<std::size_t> picks;
  picks.reserve(n_out);
  const double step = total / static_cast<double>(n_out);
  double position = u01 * step;
  std::size_t i = 0;
  double cumulative = weights[0];
  for (std::size_t k = 0; k < n_out; ++k) {
    while (cumulative <= position && i + 1 < weights.size())
      cumulative += weights[++i];
    picks.push_back(i);
    position += step;
  }
  return picks;
}

inline std::vector<std::size_t> systematic_resample(
    const std::vector<double>& weights, std::size_t n_out, Rng& rng) {
  return systematic_resample_with_offset(weights, n_out, rng.uniform());
}

// Effective sample size of a normalised weight vector: 1 / sum(w^2).
inline double effective_sample_size(const std::vector<double>& weights) {
  double sum = 0.0, sum2 = 0.0;
  for (double w : weights) {
    sum += w;
    sum2 += w * w;
  }
  if (sum2 <= 0.0) return 0.0;
  return (sum * sum) / sum2;
}

}  // namespace scope
