#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cmjlab/errors.hpp"

namespace cmjlab {

/// Point estimate with its standard error and the sample count behind it.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;

  /// |value - target| <= mult * se (the house Monte Carlo acceptance rule).
  bool within_se(double target, double mult = 3.0) const {
    return std::abs(value - target) <= mult * se;
  }
};

/// Welford running mean/variance accumulator.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double sd() const { return std::sqrt(variance()); }
  double se() const { return n_ > 0 ? sd() / std::sqrt(static_cast<double>(n_)) : 0.0; }

  Estimate estimate() const { return {mean(), se(), n_}; }

  /// Merge two accumulators (Chan et al.); used by replica reductions.
  void merge(const RunningStat& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * nb / (na + nb);
    m2_ += o.m2_ + d * d * na * nb / (na + nb);
    n_ += o.n_;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// L_k norm estimate from an accumulator of k-th powers: scale * mean^(1/k),
/// with the delta-method standard error. Plain empirical moments, no bias
/// correction.
inline Estimate norm_from_kth_moments(const RunningStat& kth_powers, double k,
                                      double scale = 1.0) {
  const double m = kth_powers.mean();
  Estimate e;
  e.n = kth_powers.count();
  if (m <= 0.0) return e;  // all-zero sample: norm 0, se 0
  e.value = scale * std::pow(m, 1.0 / k);
  e.se = scale * (1.0 / k) * std::pow(m, 1.0 / k - 1.0) * kth_powers.se();
  return e;
}

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
  std::size_t n = 0;

  bool ci_contains_zero(double mult = 1.96) const { return std::abs(slope) <= mult * se; }
};

/// Ordinary least squares slope of y against x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("ols_slope: need two or more paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("ols_slope: degenerate x grid");
  return sxy / sxx;
}

/// Slope of the mean curve, with the SE taken across independent replicas
/// (one OLS slope per replica row, then mean +- se of those slopes).
inline SlopeFit replica_slope(std::span<const double> x,
                              const std::vector<std::vector<double>>& rows) {
  RunningStat acc;
  for (const auto& row : rows) acc.add(ols_slope(x, row));
  return {acc.mean(), acc.se(), acc.count()};
}

/// One-sided test that E[diff] > 0 at the given z threshold
/// (1.645 corresponds to 95%).
inline bool one_sided_positive(const RunningStat& diffs, double z = 1.645) {
  if (diffs.count() < 2) return false;
  const double se = diffs.se();
  if (se == 0.0) return diffs.mean() > 0.0;
  return diffs.mean() / se > z;
}

}  // namespace cmjlab
