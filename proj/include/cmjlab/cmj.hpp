#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include <json.hpp>

#include "cmjlab/errors.hpp"
#include "cmjlab/point_process.hpp"
#include "cmjlab/rng.hpp"
#include "cmjlab/version.hpp"

namespace cmjlab {

struct EngineOptions {
  bool disable_death = false;  // pure-birth switch: individuals never die
};

struct Individual {
  std::uint64_t id = 0;  // chronological birth order, ancestors first
  std::optional<std::uint64_t> parent;
  double birth_time = 0.0;  // absolute
  EdgeLife life;
  std::optional<DegreeMarks> marks;  // only set by the degree-process runner

  bool operator==(const Individual&) const = default;
};

/// Full genealogy of one simulated population. Individuals are stored in
/// birth order (ties by creation order), so counting processes are exact
/// replays, never streamed aggregates.
struct PopulationPath {
  std::vector<Individual> individuals;
  double horizon = 0.0;
  std::uint64_t event_budget = 0;
  std::uint64_t seed = 0;
  std::uint32_t ancestors = 1;
  bool exhausted_budget = false;
  /// Births up to and including this time are fully recorded. Equals
  /// `horizon` unless the budget ran out, in which case it is the time of
  /// the last fully processed birth event.
  double complete_until = 0.0;

  bool operator==(const PopulationPath&) const = default;
};

namespace detail {

struct PendingBirth {
  double time;
  std::uint64_t parent;
  std::uint32_t event_index;
  int children;  // jump size, or the mark count for the degree process

  // min-heap on (time, parent, event_index): deterministic tie-breaking
  bool operator>(const PendingBirth& o) const {
    if (time != o.time) return time > o.time;
    if (parent != o.parent) return parent > o.parent;
    return event_index > o.event_index;
  }
};

using BirthQueue =
    std::priority_queue<PendingBirth, std::vector<PendingBirth>, std::greater<PendingBirth>>;

/// Shared engine: `children_of_event` maps an event to the number of
/// children it spawns. Lives (and marks, if requested) are drawn from
/// streams keyed by (seed, individual id), so a path is reproducible
/// independent of scheduling and extends monotonically with the horizon.
template <class ChildrenOf>
PopulationPath run_branching(const ModelParams& params, std::uint32_t ancestors, double horizon,
                             std::uint64_t event_budget, std::uint64_t seed, EngineOptions opts,
                             bool with_marks, ChildrenOf&& children_of_event) {
  params.validate();
  if (!std::isfinite(horizon) || horizon < 0.0)
    throw ValidationError("run: horizon must be finite and >= 0");
  if (ancestors == 0) throw ValidationError("run: ancestors must be >= 1");
  if (event_budget < ancestors) throw ValidationError("run: event_budget must cover the ancestors");

  PopulationPath path;
  path.horizon = horizon;
  path.event_budget = event_budget;
  path.seed = seed;
  path.ancestors = ancestors;
  path.complete_until = horizon;

  BirthQueue queue;
  auto spawn = [&](std::optional<std::uint64_t> parent, double birth_time) {
    Individual ind;
    ind.id = path.individuals.size();
    ind.parent = parent;
    ind.birth_time = birth_time;
    Rng life_rng = make_rng(seed, ind.id, RngLane::kLife);
    ind.life = sample_edge_life(params, horizon - birth_time, life_rng, opts.disable_death);
    if (with_marks) {
      Rng marks_rng = make_rng(seed, ind.id, RngLane::kMarks);
      ind.marks = sample_degree_marks(ind.life, marks_rng);
    }
    for (std::uint32_t j = 0; j < ind.life.event_ages.size(); ++j) {
      const int kids = children_of_event(ind, j);
      if (kids > 0)
        queue.push({birth_time + ind.life.event_ages[j], ind.id, j, kids});
    }
    path.individuals.push_back(std::move(ind));
  };

  for (std::uint32_t a = 0; a < ancestors; ++a) spawn(std::nullopt, 0.0);

  double last_complete = 0.0;
  while (!queue.empty()) {
    const PendingBirth ev = queue.top();
    queue.pop();
    if (path.individuals.size() + static_cast<std::size_t>(ev.children) > event_budget) {
      path.exhausted_budget = true;
      path.complete_until = last_complete;
      break;
    }
    for (int k = 0; k < ev.children; ++k) spawn(ev.parent, ev.time);
    last_complete = ev.time;
  }
  return path;
}

}  // namespace detail

/// Simulate a CMJ population: every birth event spawns `jump` children.
PopulationPath inline run_cmj(const ModelParams& params, std::uint32_t ancestors, double horizon,
                              std::uint64_t event_budget, std::uint64_t seed,
                              EngineOptions opts = {}) {
  return detail::run_branching(params, ancestors, horizon, event_budget, seed, opts,
                               /*with_marks=*/false,
                               [](const Individual& ind, std::uint32_t j) {
                                 return ind.life.jump_sizes[j];
                               });
}

/// T(t): individuals born up to and including t. Counts beyond the horizon
/// are unknown, so t > horizon is an error rather than a wrong answer.
inline std::uint64_t total_born(const PopulationPath& path, double t) {
  if (t > path.horizon) throw std::out_of_range("total_born: t exceeds the simulated horizon");
  std::uint64_t n = 0;
  for (const auto& ind : path.individuals) {
    if (ind.birth_time > t) break;  // individuals are in birth order
    ++n;
  }
  return n;
}

/// Z^phi(t): sum of the characteristic over everyone born by t, evaluated at
/// their current ages.
inline double z_phi(const PopulationPath& path, const Characteristic& chr, double t) {
  if (t > path.horizon) throw std::out_of_range("z_phi: t exceeds the simulated horizon");
  double total = 0.0;
  for (const auto& ind : path.individuals) {
    if (ind.birth_time > t) break;
    total += eval_characteristic(chr, ind.life, t - ind.birth_time);
  }
  return total;
}

/// Replays the self-similarity decomposition on a recorded single-ancestor
/// path: the whole-population count must equal the ancestor's own value plus
/// the counts of the subtrees rooted at each of its children, shifted to
/// their birth times. True iff the two evaluations agree exactly.
inline bool decompose_check(const PopulationPath& path, const Characteristic& chr, double t) {
  if (path.ancestors != 1)
    throw ValidationError("decompose_check: requires a single-ancestor path");
  if (t > path.horizon) throw std::out_of_range("decompose_check: t exceeds the horizon");

  const double lhs = z_phi(path, chr, t);

  // Root of each individual's ancestor-child subtree (0 for the ancestor).
  std::vector<std::uint64_t> subtree_root(path.individuals.size(), 0);
  double rhs = (path.individuals.empty() || t < 0.0)
                   ? 0.0
                   : eval_characteristic(chr, path.individuals[0].life, t);
  std::vector<double> subtree_sum(path.individuals.size(), 0.0);
  for (std::size_t i = 1; i < path.individuals.size(); ++i) {
    const auto& ind = path.individuals[i];
    const std::uint64_t par = *ind.parent;
    subtree_root[i] = (par == 0) ? static_cast<std::uint64_t>(i) : subtree_root[par];
    if (ind.birth_time > t) continue;
    subtree_sum[subtree_root[i]] +=
        eval_characteristic(chr, ind.life, t - ind.birth_time);
  }
  for (std::size_t i = 1; i < path.individuals.size(); ++i)
    if (subtree_root[i] == i) rhs += subtree_sum[i];
  return lhs == rhs;
}

inline constexpr const char* kGenealogySchema = "cmjlab.genealogy/1";

inline nlohmann::ordered_json genealogy_json(const PopulationPath& path) {
  nlohmann::ordered_json doc;
  doc["schema"] = kGenealogySchema;
  doc["tool_version"] = kVersion;
  doc["seed"] = path.seed;
  doc["ancestors"] = path.ancestors;
  doc["horizon"] = path.horizon;
  doc["event_budget"] = path.event_budget;
  doc["exhausted_budget"] = path.exhausted_budget;
  doc["complete_until"] = path.complete_until;
  auto& arr = doc["individuals"] = nlohmann::ordered_json::array();
  for (const auto& ind : path.individuals) {
    nlohmann::ordered_json rec;
    rec["id"] = ind.id;
    if (ind.parent)
      rec["parent"] = *ind.parent;
    else
      rec["parent"] = nullptr;
    rec["birth_time"] = ind.birth_time;
    rec["event_ages"] = ind.life.event_ages;
    rec["jump_sizes"] = ind.life.jump_sizes;
    rec["lifetime"] = ind.life.lifetime;
    rec["truncated"] = ind.life.truncated;
    arr.push_back(std::move(rec));
  }
  return doc;
}

inline PopulationPath genealogy_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != kGenealogySchema)
    throw ValidationError("genealogy_from_json: unknown schema");
  PopulationPath path;
  path.seed = doc.at("seed").get<std::uint64_t>();
  path.ancestors = doc.at("ancestors").get<std::uint32_t>();
  path.horizon = doc.at("horizon").get<double>();
  path.event_budget = doc.at("event_budget").get<std::uint64_t>();
  path.exhausted_budget = doc.at("exhausted_budget").get<bool>();
  path.complete_until = doc.at("complete_until").get<double>();
  for (const auto& rec : doc.at("individuals")) {
    Individual ind;
    ind.id = rec.at("id").get<std::uint64_t>();
    if (!rec.at("parent").is_null()) ind.parent = rec.at("parent").get<std::uint64_t>();
    ind.birth_time = rec.at("birth_time").get<double>();
    ind.life.event_ages = rec.at("event_ages").get<std::vector<double>>();
    ind.life.jump_sizes = rec.at("jump_sizes").get<std::vector<int>>();
    ind.life.lifetime = rec.at("lifetime").get<double>();
    ind.life.truncated = rec.at("truncated").get<bool>();
    path.individuals.push_back(std::move(ind));
  }
  return path;
}

}  // namespace cmjlab
