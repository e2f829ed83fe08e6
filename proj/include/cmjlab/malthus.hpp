#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmjlab/errors.hpp"
#include "cmjlab/model.hpp"
#include "cmjlab/point_process.hpp"
#include "cmjlab/quadrature.hpp"
#include "cmjlab/rng.hpp"
#include "cmjlab/stats.hpp"
#include "cmjlab/version.hpp"

namespace cmjlab {

namespace detail {

/// integral_0^1 (1-u)^(s-1) g(u) du for s > 0 and smooth g. For s < 1 the
/// endpoint singularity at u = 1 is removed exactly by u = 1 - v^(1/s),
/// which turns the power-law factor into the constant 1/s.
template <class G>
QuadResult power_law_integral(double s, const G& g, double abs_tol, int max_panels = 4000) {
  if (!(s > 0.0)) throw ValidationError("power_law_integral: exponent must be positive");
  if (s < 1.0) {
    auto f = [&](double v) { return g(-std::expm1(std::log(v) / s)); };
    QuadResult r = integrate(f, 0.0, 1.0, abs_tol * s, max_panels);
    r.value /= s;
    r.abs_error /= s;
    return r;
  }
  auto f = [&](double u) {
    const double lg = s == 1.0 ? 0.0 : (s - 1.0) * std::log1p(-u);
    return std::exp(lg) * g(u);
  };
  return integrate(f, 0.0, 1.0, abs_tol, max_panels);
}

struct BisectResult {
  double root;
  int iterations;
};

/// Bracketed bisection for a monotone function: h(lo) and h(hi) must have
/// opposite signs. Robustness over speed; the problems here are scalar and
/// strictly monotone.
template <class H>
BisectResult bisect(const H& h, double lo, double hi, double h_lo, int max_iter = 60,
                    double width_tol = 1e-12) {
  BisectResult res{0.5 * (lo + hi), 0};
  for (int i = 0; i < max_iter && hi - lo > width_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h(mid);
    if ((hm > 0.0) == (h_lo > 0.0)) {
      lo = mid;
      h_lo = hm;
    } else {
      hi = mid;
    }
    res.root = 0.5 * (lo + hi);
    res.iterations = i + 1;
  }
  return res;
}

}  // namespace detail

/// Laplace transform f(theta) of the edge reproduction measure:
///   f(theta) = (1+p)/c * integral_0^1 (1-u)^((theta+1+b)/c - 1)
///                         * exp(u(2-pu)/(2c)) du.
/// Strictly decreasing in theta; f(0) is the mean total offspring count.
inline double reproduction_laplace(const ModelParams& params, double theta,
                                   double abs_tol = 1e-10) {
  params.validate();
  if (!std::isfinite(theta) || theta < 0.0)
    throw ValidationError("reproduction_laplace: theta must be finite and >= 0");
  const double s = (theta + 1.0 + params.b) / params.c;
  const double half_inv_c = 0.5 / params.c;
  auto g = [&](double u) { return std::exp(u * (2.0 - params.p * u) * half_inv_c); };
  const double pref = (1.0 + params.p) / params.c;
  // scale the quadrature tolerance so the final value meets abs_tol
  return pref * detail::power_law_integral(s, g, abs_tol / pref).value;
}

/// Lower/upper envelope of f(theta) from bounding the exponential factor on
/// [0,1]. Used for a-priori bracket bounds and as a sanity check.
inline std::pair<double, double> reproduction_laplace_envelope(const ModelParams& params,
                                                               double theta) {
  const double base = (1.0 + params.p) / (theta + 1.0 + params.b);
  return {base, base * std::exp((2.0 - params.p) / (2.0 * params.c))};
}

namespace detail {

inline std::optional<BisectResult> solve_laplace_root(const ModelParams& params, double target,
                                                      double tol) {
  const double quad_tol = std::min(tol / 10.0, 1e-10);
  auto f = [&](double theta) { return reproduction_laplace(params, theta, quad_tol); };
  const double f0 = f(0.0);
  if (f0 <= target) return std::nullopt;
  double hi = 1.0;
  while (f(hi) >= target) hi *= 2.0;  // envelope decay guarantees termination
  auto h = [&](double theta) { return f(theta) - target; };
  BisectResult res = bisect(h, 0.0, hi, f0 - target);
  const double residual = std::abs(f(res.root) - target);
  if (residual > tol)
    throw NumericalError("laplace root residual " + std::to_string(residual) +
                         " exceeds tol " + std::to_string(tol));
  return res;
}

}  // namespace detail

/// Malthusian parameter alpha of the edge process: the unique root of
/// f(alpha) = 1. Empty iff the process is not supercritical (f(0) <= 1).
inline std::optional<double> solve_malthusian(const ModelParams& params, double tol = 1e-9) {
  auto res = detail::solve_laplace_root(params, 1.0, tol);
  if (!res) return std::nullopt;
  return res->root;
}

/// Malthusian parameter beta of a vertex's degree process: the unique
/// positive root of f(beta) = 2. Exists iff the degree process is
/// supercritical, i.e. E eta(inf) = f(0)/2 > 1. Always beta < alpha.
inline std::optional<double> solve_degree_malthusian(const ModelParams& params,
                                                     double tol = 1e-9) {
  auto res = detail::solve_laplace_root(params, 2.0, tol);
  if (!res) return std::nullopt;
  return res->root;
}

/// E eta(inf): mean total degree gain a single incident edge brings to its
/// endpoint. Identical integrand to f(0) with half the prefactor; the
/// identity eta_mean == f(0)/2 is asserted.
inline double degree_reproduction_mean(const ModelParams& params, double abs_tol = 1e-10) {
  params.validate();
  const double s = (1.0 + params.b) / params.c;
  const double half_inv_c = 0.5 / params.c;
  auto g = [&](double u) { return std::exp(u * (2.0 - params.p * u) * half_inv_c); };
  const double pref = (1.0 + params.p) / (2.0 * params.c);
  const double value = pref * detail::power_law_integral(s, g, abs_tol / pref).value;
  const double other = 0.5 * reproduction_laplace(params, 0.0, abs_tol);
  if (std::abs(value - other) > 100.0 * abs_tol * std::max(1.0, std::abs(value)))
    throw ConsistencyError("degree_reproduction_mean disagrees with f(0)/2");
  return value;
}

/// Left-hand side of the extinction equation at a given z:
///   g(z) = (1+p)/(2c) * integral_0^1 (1-u)^((1+b)/c - 1) exp((1+p)/(2c) u(1-u) z) du.
/// Continuous and strictly increasing in z.
inline double extinction_equation_value(const ModelParams& params, double z,
                                        double abs_tol = 1e-10) {
  params.validate();
  if (!std::isfinite(z) || z < 0.0)
    throw ValidationError("extinction_equation_value: z must be finite and >= 0");
  const double s = (1.0 + params.b) / params.c;
  const double kappa = (1.0 + params.p) / (2.0 * params.c);
  auto g = [&](double u) { return std::exp(kappa * u * (1.0 - u) * z); };
  return kappa * detail::power_law_integral(s, g, abs_tol / kappa).value;
}

/// Smallest root z in (0,1] of g(z) = 1, which yields the isolation
/// probability p z^2 + q z of a newborn vertex. g is strictly increasing in
/// z, so the first bracket of a 1/64-step scan contains the smallest root.
/// Empty if there is no root in the unit interval.
inline std::optional<double> extinction_root(const ModelParams& params, double tol = 1e-9) {
  params.validate();
  const double quad_tol = std::min(tol / 10.0, 1e-10);
  auto g_of = [&](double z) { return extinction_equation_value(params, z, quad_tol); };
  double lo = 0.0, g_lo = g_of(0.0) - 1.0;
  if (g_lo > 0.0) throw ConsistencyError("extinction_root: g(0) > 1, invalid regime");
  std::optional<double> bracket_hi;
  for (int i = 1; i <= 64; ++i) {
    const double zi = static_cast<double>(i) / 64.0;
    const double gi = g_of(zi) - 1.0;
    if (gi >= 0.0) {
      bracket_hi = zi;
      break;
    }
    lo = zi;
    g_lo = gi;
  }
  if (!bracket_hi) return std::nullopt;  // no root in (0,1]
  auto h = [&](double z) { return g_of(z) - 1.0; };
  const double root = detail::bisect(h, lo, *bracket_hi, g_lo).root;
  if (std::abs(g_of(root) - 1.0) > tol)
    throw NumericalError("extinction_root residual exceeds tol");
  return root;
}

/// Discount factor m = f(k * alpha), the contraction constant of the moment
/// recursion. Consistency demands m < 1 for k > 1 when alpha is a true root;
/// k = 1 is the degenerate self-check m ~= 1 and is allowed through.
inline double discount_factor(const ModelParams& params, double k, double alpha,
                              double abs_tol = 1e-10) {
  if (!(k >= 1.0)) throw ValidationError("discount_factor: k must be >= 1");
  if (!(alpha > 0.0)) throw ValidationError("discount_factor: alpha must be positive");
  const double m = reproduction_laplace(params, k * alpha, abs_tol);
  if (k > 1.0 && m >= 1.0)
    throw ConsistencyError("discount_factor: m >= 1; alpha is not a valid root");
  return m;
}

/// Monte Carlo estimate of E integral e^(-theta t) xi(dt): the mean of
/// sum_j jump_j * e^(-theta sigma_j) over sampled edge lives. At theta =
/// alpha the true value is exactly 1.
inline Estimate mc_discounted_reproduction(const ModelParams& params, double theta,
                                           std::size_t n, std::uint64_t seed) {
  params.validate();
  if (!(theta > 0.0)) throw ValidationError("mc_discounted_reproduction: theta must be > 0");
  if (n < 100) throw ValidationError("mc_discounted_reproduction: need n >= 100");
  const double horizon = 200.0 / params.b + 200.0 / theta;
  RunningStat acc;
  bool any_truncated = false;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, i, RngLane::kLife);
    const EdgeLife life = sample_edge_life(params, horizon, rng);
    any_truncated |= life.truncated;
    double x = 0.0;
    for (std::size_t j = 0; j < life.event_ages.size(); ++j)
      x += life.jump_sizes[j] * std::exp(-theta * life.event_ages[j]);
    acc.add(x);
  }
  const Estimate est = acc.estimate();
  if (any_truncated && std::exp(-theta * horizon) > 1e-12 * std::abs(est.value))
    throw ReliabilityError("mc_discounted_reproduction: horizon too short for this theta");
  return est;
}

/// One-stop numerical report for a parameter set.
struct SolveReport {
  ModelParams params;
  double tol = 0.0;
  std::optional<double> alpha;
  std::optional<double> beta;
  double repro_mean = 0.0;  // f(0), mean total offspring of an edge
  double eta_mean = 0.0;    // E eta(inf), mean degree gain per incident edge
  std::optional<double> z;  // extinction root in (0,1]
  std::optional<double> extinction_prob_degree;  // p z^2 + q z
  std::vector<std::pair<double, double>> discounts;  // (k, m_k); needs alpha
  std::optional<double> residual_alpha, residual_beta, residual_z;

  bool supercritical() const { return alpha.has_value(); }
  bool degree_supercritical() const { return beta.has_value(); }
};

inline SolveReport solve_all(const ModelParams& params, const std::vector<double>& ks,
                             double tol = 1e-9) {
  params.validate();
  SolveReport rep;
  rep.params = params;
  rep.tol = tol;
  const double quad_tol = std::min(tol / 10.0, 1e-10);
  rep.repro_mean = reproduction_laplace(params, 0.0, quad_tol);
  rep.eta_mean = degree_reproduction_mean(params, quad_tol);
  rep.alpha = solve_malthusian(params, tol);
  rep.beta = solve_degree_malthusian(params, tol);
  rep.z = extinction_root(params, tol);
  if (rep.alpha) rep.residual_alpha = std::abs(reproduction_laplace(params, *rep.alpha) - 1.0);
  if (rep.beta) rep.residual_beta = std::abs(reproduction_laplace(params, *rep.beta) - 2.0);
  if (rep.z) {
    rep.extinction_prob_degree = params.p * *rep.z * *rep.z + params.q() * *rep.z;
    rep.residual_z = std::abs(extinction_equation_value(params, *rep.z) - 1.0);
  }
  if (rep.alpha)
    for (double k : ks) rep.discounts.emplace_back(k, discount_factor(params, k, *rep.alpha));
  return rep;
}

inline constexpr const char* kSolveSchema = "cmjlab.solve_report/1";

inline nlohmann::ordered_json to_json(const SolveReport& rep) {
  nlohmann::ordered_json doc;
  doc["schema"] = kSolveSchema;
  doc["tool_version"] = kVersion;
  doc["params"] = {{"b", rep.params.b}, {"c", rep.params.c}, {"p", rep.params.p},
                   {"q", rep.params.q()}};
  doc["tol"] = rep.tol;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  doc["supercritical"] = rep.supercritical();
  doc["degree_supercritical"] = rep.degree_supercritical();
  doc["alpha"] = opt(rep.alpha);
  doc["beta"] = opt(rep.beta);
  doc["repro_mean"] = rep.repro_mean;
  doc["eta_mean"] = rep.eta_mean;
  doc["z"] = opt(rep.z);
  doc["extinction_prob_degree"] = opt(rep.extinction_prob_degree);
  auto& ms = doc["discounts"] = nlohmann::ordered_json::array();
  for (auto [k, m] : rep.discounts) ms.push_back({{"k", k}, {"m", m}});
  doc["residual_alpha"] = opt(rep.residual_alpha);
  doc["residual_beta"] = opt(rep.residual_beta);
  doc["residual_z"] = opt(rep.residual_z);
  return doc;
}

}  // namespace cmjlab
