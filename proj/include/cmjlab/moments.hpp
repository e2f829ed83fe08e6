#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmjlab/cmj.hpp"
#include "cmjlab/collab_graph.hpp"
#include "cmjlab/errors.hpp"
#include "cmjlab/exec.hpp"
#include "cmjlab/malthus.hpp"
#include "cmjlab/model.hpp"
#include "cmjlab/point_process.hpp"
#include "cmjlab/stats.hpp"

namespace cmjlab {

/// Normalized L_k curve of a counted process: per grid time,
/// e^(-rate t) * (empirical k-th moment of Z^phi(t))^(1/k) with delta-method
/// standard errors. Budget-exhausted replicas are excluded and counted.
struct MomentSeries {
  double k = 1.0;
  double rate = 0.0;
  std::vector<double> t_grid;
  std::vector<double> estimates;
  std::vector<double> se;
  std::size_t replicas = 0;
  std::size_t excluded = 0;
};

struct LkOptions {
  std::uint32_t ancestors = 1;
  std::uint64_t event_budget = 2000000;
  EngineOptions engine{};
  unsigned threads = 1;
  double max_excluded_fraction = 0.01;
};

/// Monte Carlo L_k series for the CMJ process counted by `chr`. When `raw`
/// is given it receives one row per included replica with the normalized
/// (not k-th-powered) values e^(-rate t) Z(t) -- handy for slope tests.
inline MomentSeries lk_series(const ModelParams& params, const Characteristic& chr, double k,
                              double rate, std::span<const double> t_grid, std::size_t replicas,
                              std::uint64_t seed, const LkOptions& opts = {},
                              std::vector<std::vector<double>>* raw = nullptr) {
  params.validate();
  if (!(k >= 1.0)) throw ValidationError("lk_series: k must be >= 1");
  if (replicas < 100) throw ValidationError("lk_series: need at least 100 replicas");
  if (t_grid.empty()) throw ValidationError("lk_series: empty grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0) throw ValidationError("lk_series: negative grid time");
    if (i > 0 && t_grid[i] < t_grid[i - 1])
      throw ValidationError("lk_series: grid must be nondecreasing");
  }
  const double horizon = t_grid.back();

  std::vector<std::vector<double>> values(replicas);
  std::vector<std::uint8_t> ok(replicas, 0);
  for_each_replica(replicas, opts.threads, [&](std::size_t r) {
    const auto path = run_cmj(params, opts.ancestors, horizon, opts.event_budget,
                              replica_seed(seed, r), opts.engine);
    if (path.exhausted_budget) return;
    ok[r] = 1;
    values[r].reserve(t_grid.size());
    for (double t : t_grid) values[r].push_back(z_phi(path, chr, t));
  });

  MomentSeries series;
  series.k = k;
  series.rate = rate;
  series.t_grid.assign(t_grid.begin(), t_grid.end());
  series.replicas = replicas;
  for (std::size_t r = 0; r < replicas; ++r) series.excluded += ok[r] ? 0 : 1;
  if (static_cast<double>(series.excluded) >
      opts.max_excluded_fraction * static_cast<double>(replicas))
    throw ReliabilityError("lk_series: budget exhausted in " + std::to_string(series.excluded) +
                           " of " + std::to_string(replicas) + " replicas");

  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    RunningStat acc;
    for (std::size_t r = 0; r < replicas; ++r)
      if (ok[r]) acc.add(std::pow(std::abs(values[r][i]), k));
    const Estimate est = norm_from_kth_moments(acc, k, std::exp(-rate * t_grid[i]));
    series.estimates.push_back(est.value);
    series.se.push_back(est.se);
  }
  if (raw) {
    raw->clear();
    for (std::size_t r = 0; r < replicas; ++r) {
      if (!ok[r]) continue;
      std::vector<double> row(t_grid.size());
      for (std::size_t i = 0; i < t_grid.size(); ++i)
        row[i] = std::exp(-rate * t_grid[i]) * values[r][i];
      raw->push_back(std::move(row));
    }
  }
  return series;
}

/// ||integral e^(-alpha t) xi(dt)||_k over edge lives (the constant feeding
/// the moment bound). k-th root of the plain empirical k-th moment.
inline Estimate discounted_repro_norm(const ModelParams& params, double k, double alpha,
                                      std::size_t n, std::uint64_t seed) {
  params.validate();
  if (!(k >= 1.0)) throw ValidationError("discounted_repro_norm: k must be >= 1");
  if (!(alpha > 0.0)) throw ValidationError("discounted_repro_norm: alpha must be > 0");
  if (n < 1000) throw ValidationError("discounted_repro_norm: need n >= 1000");
  const double horizon = 200.0 / params.b + 200.0 / alpha;
  RunningStat acc;
  bool any_truncated = false;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, i, RngLane::kLife);
    const EdgeLife life = sample_edge_life(params, horizon, rng);
    any_truncated |= life.truncated;
    double x = 0.0;
    for (std::size_t j = 0; j < life.event_ages.size(); ++j)
      x += life.jump_sizes[j] * std::exp(-alpha * life.event_ages[j]);
    acc.add(std::pow(x, k));
  }
  const Estimate est = norm_from_kth_moments(acc, k);
  if (any_truncated && std::exp(-alpha * horizon) > 1e-12 * std::abs(est.value))
    throw ReliabilityError("discounted_repro_norm: horizon too short");
  return est;
}

struct SupNormEstimate {
  Estimate value;       // max over the grid of e^(-rate t) ||phi(t)||_k
  double argmax_t = 0;  // grid time attaining the max
};

/// sup_t e^(-rate t) ||phi(t)||_k over a grid dense enough to hit the
/// characteristic's breakpoints. Only the lifetime is random for the
/// built-in characteristics, so n lives are sampled once and reused.
inline SupNormEstimate characteristic_sup_norm(const Characteristic& chr,
                                               const ModelParams& params, double k, double rate,
                                               std::span<const double> t_grid, std::size_t n,
                                               std::uint64_t seed) {
  params.validate();
  if (!(k >= 1.0)) throw ValidationError("characteristic_sup_norm: k must be >= 1");
  if (t_grid.empty()) throw ValidationError("characteristic_sup_norm: empty grid");
  const double horizon = t_grid.back() + 200.0 / params.b;
  std::vector<EdgeLife> lives;
  lives.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, i, RngLane::kLife);
    lives.push_back(sample_edge_life(params, horizon, rng));
  }
  SupNormEstimate best;
  best.argmax_t = t_grid.front();
  for (double t : t_grid) {
    RunningStat acc;
    for (const auto& life : lives) acc.add(std::pow(eval_characteristic(chr, life, t), k));
    const Estimate est = norm_from_kth_moments(acc, k, std::exp(-rate * t));
    if (est.value > best.value.value) {
      best.value = est;
      best.argmax_t = t;
    }
  }
  return best;
}

/// Largest product prod C_i^(nu_i) over nonnegative integer solutions of
/// sum i*nu_i = h with parts restricted to 1..k-1. Exhaustive enumeration;
/// supported up to k = 12.
inline double max_partition_product(int k, int h, std::span<const double> c) {
  if (k < 2 || k > 12) throw ValidationError("max_partition_product: need 2 <= k <= 12");
  if (h < 1 || h > k) throw ValidationError("max_partition_product: need 1 <= h <= k");
  if (c.empty()) throw ValidationError("max_partition_product: empty constant list");
  const int max_part = std::min<int>(k - 1, static_cast<int>(c.size()));
  if (max_part < 1) throw ValidationError("max_partition_product: no usable parts");
  for (double ci : c)
    if (!(ci > 0.0)) throw ValidationError("max_partition_product: constants must be positive");

  double best = -1.0;
  auto rec = [&](auto&& self, int remaining, int part_cap, double prod) -> void {
    if (remaining == 0) {
      best = std::max(best, prod);
      return;
    }
    for (int part = std::min(part_cap, remaining); part >= 1; --part)
      self(self, remaining - part, part, prod * c[static_cast<std::size_t>(part - 1)]);
  };
  rec(rec, h, max_part, 1.0);
  if (best < 0.0)
    throw ValidationError("max_partition_product: h not representable with parts <= k-1");
  return best;
}

/// Uniform k-th moment bound rho * (A+B)^k / (1-m). rho is maximized over
/// all subset sizes h in 1..k, which is the safe constant for the full sum.
inline double moment_bound(int k, double a, double b, double m, std::span<const double> c) {
  if (k < 2) throw ValidationError("moment_bound: k must be >= 2");
  if (!(m < 1.0)) throw ValidationError("moment_bound: m must be < 1");
  if (!(a >= 0.0 && b >= 0.0)) throw ValidationError("moment_bound: A and B must be >= 0");
  double rho = 0.0;
  for (int h = 1; h <= k; ++h) rho = std::max(rho, max_partition_product(k, h, c));
  return rho * std::pow(a + b, k) / (1.0 - m);
}

struct BoundReport {
  int k = 2;
  double alpha = 0.0;
  Estimate a;                  // ||_alpha xi(inf)||_k
  Estimate b;                  // sup_t e^(-alpha t) ||phi(t)||_k
  double m = 0.0;              // discount factor at k*alpha
  std::vector<double> c;       // C_1..C_(k-1), measured plateaus
  double rho = 0.0;
  double bound = 0.0;
};

/// Assemble the k-th moment bound for the collaboration model's counted
/// process: C_j plateaus measured from the lower-order normalized series
/// (max over the last half of the grid, plus 3 SE), A and B by Monte Carlo,
/// m by quadrature.
inline BoundReport bound_report(const ModelParams& params, const Characteristic& chr, int k,
                                double alpha, std::span<const double> t_grid,
                                std::size_t replicas, std::size_t n_samples, std::uint64_t seed,
                                const LkOptions& opts = {}) {
  if (k < 2) throw ValidationError("bound_report: k must be >= 2");
  BoundReport rep;
  rep.k = k;
  rep.alpha = alpha;
  for (int j = 1; j < k; ++j) {
    const MomentSeries s = lk_series(params, chr, j, alpha, t_grid, replicas,
                                     derive_stream(seed, static_cast<std::uint64_t>(j),
                                                   RngLane::kReplica),
                                     opts);
    double plateau = 0.0;
    for (std::size_t i = s.t_grid.size() / 2; i < s.t_grid.size(); ++i)
      plateau = std::max(plateau, s.estimates[i] + 3.0 * s.se[i]);
    rep.c.push_back(plateau);
  }
  rep.a = discounted_repro_norm(params, k, alpha, n_samples,
                                derive_stream(seed, 101, RngLane::kReplica));
  rep.b = characteristic_sup_norm(chr, params, k, alpha, t_grid, n_samples,
                                  derive_stream(seed, 102, RngLane::kReplica))
              .value;
  rep.m = discount_factor(params, k, alpha);
  rep.rho = 0.0;
  for (int h = 1; h <= k; ++h)
    rep.rho = std::max(rep.rho, max_partition_product(k, h, rep.c));
  rep.bound = moment_bound(k, rep.a.value, rep.b.value, rep.m, rep.c);
  return rep;
}

struct CorollaryReport {
  double k = 0.0, p_exp = 0.0, alpha = 0.0;
  double xi0_norm = 0.0;      // ||xi(0)||_k; exactly 0 here (no event at age 0 a.s.)
  bool xi0_exact = true;
  Estimate repro_norm_k;      // ||_alpha xi(inf)||_k
  Estimate repro_norm_p;      // same at order p_exp
  double sup_inside_norm = 0.0;  // ||sup_t e^(-alpha t) phi(t)||_k, exact for built-ins
  Estimate char_sup_norm_k;      // sup_t e^(-alpha t) ||phi(t)||_k
  double stable_se_fraction = 0.05;
  bool first_condition_holds = false;   // bounded-at-zero + A_k + sup-inside-norm route
  bool second_condition_holds = false;  // higher-order A_p + sup-outside-norm route
};

/// Evaluate both sufficient-condition sets for uniform L_k boundedness on
/// the collaboration model. "Finite" for a Monte Carlo estimate means its
/// SE is below stable_se_fraction of the estimate.
inline CorollaryReport corollary_conditions(const ModelParams& params, const Characteristic& chr,
                                            double k, double p_exp, std::size_t n,
                                            std::uint64_t seed) {
  params.validate();
  if (!(p_exp > k)) throw ValidationError("corollary_conditions: p_exp must exceed k");
  if (n < 1000) throw ValidationError("corollary_conditions: need n >= 1000");
  CorollaryReport rep;
  rep.k = k;
  rep.p_exp = p_exp;
  const auto alpha = solve_malthusian(params);
  if (!alpha) throw ValidationError("corollary_conditions: process not supercritical");
  rep.alpha = *alpha;
  rep.xi0_norm = 0.0;  // unit-rate Poisson: no birth event at age 0, a.s.
  rep.xi0_exact = true;
  rep.repro_norm_k = discounted_repro_norm(params, k, *alpha, n,
                                           derive_stream(seed, 1, RngLane::kReplica));
  rep.repro_norm_p = discounted_repro_norm(params, p_exp, *alpha, n,
                                           derive_stream(seed, 2, RngLane::kReplica));
  // sup inside the norm: deterministic for the built-in characteristics
  // (indicators are maximized at age 0 where the discount is 1).
  switch (chr.kind) {
    case Characteristic::Kind::kBorn:
    case Characteristic::Kind::kAlive:
      rep.sup_inside_norm = 1.0;
      break;
    case Characteristic::Kind::kWeighted: {
      double best = 0.0;
      for (std::size_t i = 0; i < chr.break_ages.size(); ++i)
        best = std::max(best, std::exp(-*alpha * chr.break_ages[i]) * chr.weights[i]);
      rep.sup_inside_norm = best;
      break;
    }
  }
  std::vector<double> grid;
  for (int i = 0; i <= 64; ++i) grid.push_back(10.0 * i / 64.0);
  rep.char_sup_norm_k = characteristic_sup_norm(chr, params, k, *alpha, grid, n,
                                                derive_stream(seed, 3, RngLane::kReplica))
                            .value;
  auto stable = [&](const Estimate& e) {
    return e.value > 0.0 && e.se <= rep.stable_se_fraction * e.value;
  };
  rep.first_condition_holds =
      rep.xi0_norm < 1.0 && stable(rep.repro_norm_k) && std::isfinite(rep.sup_inside_norm);
  rep.second_condition_holds =
      rep.xi0_norm < 1.0 && stable(rep.repro_norm_p) && stable(rep.char_sup_norm_k);
  return rep;
}

/// Per-horizon maximal-degree convergence summary. For each replica and
/// horizon T: the scaled maximal degree e^(-beta T) M(T) (computed as the
/// attaining vertex's term) and the plug-in sup_i e^(-beta tau_i) Yhat_i
/// with Yhat_i = e^(-beta (T - tau_i)) D_i(T). The plug-in majorizes the
/// scaled maximum term-by-term, which is asserted exactly per replica.
struct DeltaReport {
  double alpha = 0.0, beta = 0.0;
  int k = 0;
  std::vector<double> horizons;
  std::size_t replicas = 0;
  std::size_t excluded = 0;  // budget-exhausted replicas, dropped
  std::size_t died_out = 0;  // no living edge at the last horizon
  bool identity_ok = true;
  std::vector<double> distance;     // L_k distance to the last-horizon plug-in
  std::vector<double> distance_se;  // delta-method SE
  double trend_stat = 0.0;          // one-sided first-vs-last z statistic
  bool trend_pass = false;
  double liminf_proxy_mean = 0.0;  // mean over replicas of the tail minimum
  std::vector<std::vector<double>> scaled_max;  // [replica][horizon]
  std::vector<std::vector<double>> plugin;      // [replica][horizon]
  std::vector<double> plugin_last;              // [replica]
};

inline DeltaReport delta_report(const ModelParams& params, std::span<const double> horizons,
                                std::size_t replicas, int k, std::uint64_t seed,
                                std::uint64_t event_budget = 1000000, unsigned threads = 1) {
  params.validate();
  if (horizons.size() < 2) throw ValidationError("delta_report: need at least two horizons");
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (horizons[i] <= horizons[i - 1])
      throw ValidationError("delta_report: horizons must be strictly increasing");
  if (replicas < 100) throw ValidationError("delta_report: need at least 100 replicas");
  const auto alpha = solve_malthusian(params);
  const auto beta = solve_degree_malthusian(params);
  if (!alpha || !beta)
    throw ValidationError("delta_report: requires a supercritical edge and degree process");
  const double ratio = *alpha / *beta;
  if (static_cast<double>(k) <= ratio)
    throw ValidationError("delta_report: k must exceed alpha/beta = " + std::to_string(ratio));

  DeltaReport rep;
  rep.alpha = *alpha;
  rep.beta = *beta;
  rep.k = k;
  rep.horizons.assign(horizons.begin(), horizons.end());
  rep.replicas = replicas;

  const std::size_t nh = horizons.size();
  std::vector<std::vector<double>> smax(replicas), splug(replicas);
  std::vector<std::uint8_t> ok(replicas, 0), died(replicas, 0), ident(replicas, 1);
  for_each_replica(replicas, threads, [&](std::size_t r) {
    const auto path = run_collab(params, horizons.back(), event_budget, replica_seed(seed, r));
    if (path.exhausted_budget) return;
    ok[r] = 1;
    std::vector<std::uint32_t> deg(path.vertices.size());
    smax[r].resize(nh);
    splug[r].resize(nh);
    for (std::size_t j = 0; j < nh; ++j) {
      const double T = horizons[j];
      std::fill(deg.begin(), deg.end(), 0);
      std::uint64_t living = 0;
      for (const auto& e : path.edges) {
        if (e.birth_time > T || !path.edge_alive(e, T)) continue;
        ++living;
        ++deg[e.v1];
        ++deg[e.v2];
      }
      std::uint32_t max_deg = 0;
      std::uint64_t attaining = 0;
      double plug = 0.0;
      for (const auto& v : path.vertices) {
        if (v.birth_time > T) break;
        if (deg[v.id] > max_deg) {
          max_deg = deg[v.id];
          attaining = v.id;
        }
        const double term = std::exp(-rep.beta * v.birth_time) *
                            std::exp(-rep.beta * (T - v.birth_time)) *
                            static_cast<double>(deg[v.id]);
        plug = std::max(plug, term);
      }
      const auto& av = path.vertices[attaining];
      const double scaled = std::exp(-rep.beta * av.birth_time) *
                            std::exp(-rep.beta * (T - av.birth_time)) *
                            static_cast<double>(max_deg);
      smax[r][j] = scaled;
      splug[r][j] = plug;
      if (!(plug >= scaled)) ident[r] = 0;
      if (j + 1 == nh && living == 0) died[r] = 1;
    }
  });

  for (std::size_t r = 0; r < replicas; ++r) {
    if (!ok[r]) {
      ++rep.excluded;
      continue;
    }
    rep.died_out += died[r];
    rep.identity_ok = rep.identity_ok && ident[r];
    rep.scaled_max.push_back(smax[r]);
    rep.plugin.push_back(splug[r]);
    rep.plugin_last.push_back(splug[r].back());
  }
  if (rep.excluded * 10 > replicas)
    throw ReliabilityError("delta_report: more than 10% of replicas exhausted the budget");

  const std::size_t n_ok = rep.scaled_max.size();
  for (std::size_t j = 0; j < nh; ++j) {
    RunningStat acc;
    for (std::size_t r = 0; r < n_ok; ++r)
      acc.add(std::pow(std::abs(rep.scaled_max[r][j] - rep.plugin_last[r]),
                       static_cast<double>(k)));
    const Estimate est = norm_from_kth_moments(acc, static_cast<double>(k));
    rep.distance.push_back(est.value);
    rep.distance_se.push_back(est.se);
  }
  RunningStat diffs;
  for (std::size_t r = 0; r < n_ok; ++r) {
    const double first = std::pow(std::abs(rep.scaled_max[r].front() - rep.plugin_last[r]),
                                  static_cast<double>(k));
    const double last = std::pow(std::abs(rep.scaled_max[r].back() - rep.plugin_last[r]),
                                 static_cast<double>(k));
    diffs.add(first - last);
  }
  rep.trend_stat = diffs.se() > 0.0 ? diffs.mean() / diffs.se()
                                    : (diffs.mean() > 0.0 ? std::numeric_limits<double>::infinity()
                                                          : 0.0);
  rep.trend_pass = one_sided_positive(diffs);
  RunningStat liminf;
  for (std::size_t r = 0; r < n_ok; ++r) {
    double tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = nh / 2; j < nh; ++j) tail_min = std::min(tail_min, rep.scaled_max[r][j]);
    liminf.add(tail_min);
  }
  rep.liminf_proxy_mean = liminf.mean();
  return rep;
}

}  // namespace cmjlab
