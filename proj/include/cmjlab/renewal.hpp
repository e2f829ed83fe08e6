#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cmjlab/errors.hpp"

namespace cmjlab {

struct RenewalResult {
  std::vector<double> values;  // final iterate on the grid
  double sup = 0.0;
  double limit = 0.0;  // gamma / (1 - m), the geometric-series ceiling
  int iterations = 0;
};

/// Iterate the renewal-type map  M <- m * (M conv mu) + gamma  on a uniform
/// grid, where mu is a (sub)probability weight vector on the same grid steps
/// and the convolution is causal. Starting from M0 == 0 the iterates rise
/// monotonically to gamma/(1-m) on the well-covered part of the grid; the
/// supremum must never exceed that ceiling beyond numerical slack, otherwise
/// a ConsistencyError is raised.
inline RenewalResult renewal_iterate(double m, double gamma, const std::vector<double>& mu_weights,
                                     std::vector<double> m0, int n_iters, double slack = 1e-9) {
  if (!(m > 0.0 && m < 1.0)) throw ValidationError("renewal_iterate: m must lie in (0,1)");
  if (!(gamma > 0.0)) throw ValidationError("renewal_iterate: gamma must be positive");
  if (m0.empty()) throw ValidationError("renewal_iterate: empty grid");
  if (mu_weights.empty() || mu_weights.size() > m0.size())
    throw ValidationError("renewal_iterate: mu must be nonempty and fit the grid");
  double mass = 0.0;
  for (double w : mu_weights) {
    if (w < 0.0) throw ValidationError("renewal_iterate: negative mu weight");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-12)
    throw ValidationError("renewal_iterate: mu weights must sum to 1");
  for (double v : m0)
    if (!std::isfinite(v)) throw ValidationError("renewal_iterate: M0 must be bounded");

  RenewalResult res;
  res.limit = gamma / (1.0 - m);
  std::vector<double> cur = std::move(m0);
  std::vector<double> next(cur.size());
  for (int it = 0; it < n_iters; ++it) {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      double conv = 0.0;
      const std::size_t jmax = std::min(i + 1, mu_weights.size());
      for (std::size_t j = 0; j < jmax; ++j) conv += mu_weights[j] * cur[i - j];
      next[i] = m * conv + gamma;
    }
    cur.swap(next);
    res.iterations = it + 1;
  }
  res.sup = *std::max_element(cur.begin(), cur.end());
  res.values = std::move(cur);
  if (res.sup > res.limit + slack * std::max(1.0, res.limit))
    throw ConsistencyError("renewal_iterate: supremum exceeds gamma/(1-m); divergent input");
  return res;
}

}  // namespace cmjlab
