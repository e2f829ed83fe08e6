#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cmjlab/errors.hpp"
#include "cmjlab/model.hpp"
#include "cmjlab/rng.hpp"

namespace cmjlab {

/// One edge's reproduction record. Ages are relative to the edge's own
/// birth; sampled lives have strictly increasing ages, all < lifetime
/// (no reproduction after death). `truncated` marks a life cut off by the
/// simulation horizon rather than by death; its `lifetime` is then the
/// per-edge horizon, not a death age.
struct EdgeLife {
  std::vector<double> event_ages;
  std::vector<int> jump_sizes;  // each 1 or 2
  double lifetime = 0.0;
  bool truncated = false;

  int total_offspring() const {
    int s = 0;
    for (int j : jump_sizes) s += j;
    return s;
  }

  bool operator==(const EdgeLife&) const = default;
};

/// xi(t): offspring count up to and including age t. 0 for t < 0,
/// right-continuous, constant from the last event on.
inline int xi_at(const EdgeLife& life, double t) {
  if (t < 0.0) return 0;
  int s = 0;
  for (std::size_t j = 0; j < life.event_ages.size() && life.event_ages[j] <= t; ++j)
    s += life.jump_sizes[j];
  return s;
}

/// pi(t): number of birth events up to and including age t.
inline int pi_at(const EdgeLife& life, double t) {
  if (t < 0.0) return 0;
  int n = 0;
  while (n < static_cast<int>(life.event_ages.size()) &&
         life.event_ages[static_cast<std::size_t>(n)] <= t)
    ++n;
  return n;
}

/// Competing-exponentials sampler for one edge life. With xi offspring so
/// far the next event comes at total rate 1 + b + c*xi and is a birth with
/// probability 1/(1 + b + c*xi), otherwise the death. The hazard is
/// piecewise constant in xi, so this is exact, not a thinning approximation.
/// `immortal` disables death entirely (used by the pure-birth engine switch);
/// the life then always ends truncated at the horizon.
inline EdgeLife sample_edge_life(const ModelParams& params, double horizon, Rng& rng,
                                 bool immortal = false) {
  params.validate();
  if (!std::isfinite(horizon) || horizon < 0.0)
    throw ValidationError("sample_edge_life: horizon must be finite and >= 0");

  EdgeLife life;
  double age = 0.0;
  int xi = 0;
  for (;;) {
    const double hazard = immortal ? 0.0 : params.b + params.c * xi;
    const double rate = 1.0 + hazard;
    age += rng.exponential(rate);
    if (age >= horizon) {
      life.lifetime = horizon;
      life.truncated = true;
      return life;
    }
    if (!immortal && !rng.bernoulli(1.0 / rate)) {
      life.lifetime = age;
      life.truncated = false;
      return life;
    }
    const int jump = rng.bernoulli(params.p) ? 2 : 1;
    life.event_ages.push_back(age);
    life.jump_sizes.push_back(jump);
    xi += jump;
  }
}

/// Degree-increment marks paired with an edge life: a jump-2 event always
/// raises a fixed endpoint's degree (mark 1); a jump-1 event raises it with
/// a fair coin.
struct DegreeMarks {
  std::vector<int> mark_per_event;  // each 0 or 1

  bool operator==(const DegreeMarks&) const = default;
};

inline DegreeMarks sample_degree_marks(const EdgeLife& life, Rng& rng) {
  DegreeMarks marks;
  marks.mark_per_event.reserve(life.jump_sizes.size());
  for (int jump : life.jump_sizes)
    marks.mark_per_event.push_back(jump == 2 ? 1 : (rng.bernoulli(0.5) ? 1 : 0));
  return marks;
}

/// eta(t): the tracked endpoint's degree gain up to age t.
inline int eta_at(const EdgeLife& life, const DegreeMarks& marks, double t) {
  if (t < 0.0) return 0;
  int s = 0;
  for (std::size_t j = 0; j < life.event_ages.size() && life.event_ages[j] <= t; ++j)
    s += marks.mark_per_event[j];
  return s;
}

/// Random characteristic phi evaluated at an individual's age.
///  - Born:     1(age >= 0), so summing it counts everyone ever born.
///  - Alive:    1(0 <= age < lifetime), counting the living.
///  - Weighted: piecewise-constant nonnegative table over age.
struct Characteristic {
  enum class Kind { kBorn, kAlive, kWeighted };

  Kind kind = Kind::kBorn;
  std::vector<double> break_ages;  // weighted only; strictly increasing, >= 0
  std::vector<double> weights;     // value on [break_ages[i], break_ages[i+1])

  static Characteristic born() { return {Kind::kBorn, {}, {}}; }
  static Characteristic alive() { return {Kind::kAlive, {}, {}}; }

  static Characteristic weighted(std::vector<double> ages, std::vector<double> values) {
    if (ages.size() != values.size() || ages.empty())
      throw ValidationError("Characteristic: table needs matching, nonempty ages/weights");
    for (std::size_t i = 0; i < ages.size(); ++i) {
      if (!std::isfinite(ages[i]) || ages[i] < 0.0)
        throw ValidationError("Characteristic: break ages must be finite and >= 0");
      if (i > 0 && ages[i] <= ages[i - 1])
        throw ValidationError("Characteristic: break ages must be strictly increasing");
      if (!std::isfinite(values[i]) || values[i] < 0.0)
        throw ValidationError("Characteristic: weights must be finite and >= 0");
    }
    return {Kind::kWeighted, std::move(ages), std::move(values)};
  }
};

/// phi(age) for the given life. Zero for negative age in every case.
inline double eval_characteristic(const Characteristic& chr, const EdgeLife& life, double age) {
  if (age < 0.0) return 0.0;
  switch (chr.kind) {
    case Characteristic::Kind::kBorn:
      return 1.0;
    case Characteristic::Kind::kAlive:
      // A truncated life is still alive at every age up to its horizon.
      return (age < life.lifetime || (life.truncated && age <= life.lifetime)) ? 1.0 : 0.0;
    case Characteristic::Kind::kWeighted: {
      if (chr.break_ages.empty() || age < chr.break_ages.front()) return 0.0;
      auto it = std::upper_bound(chr.break_ages.begin(), chr.break_ages.end(), age);
      return chr.weights[static_cast<std::size_t>(it - chr.break_ages.begin()) - 1];
    }
  }
  return 0.0;
}

}  // namespace cmjlab
