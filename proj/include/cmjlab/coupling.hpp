#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmjlab/errors.hpp"
#include "cmjlab/point_process.hpp"
#include "cmjlab/rng.hpp"
#include "cmjlab/stats.hpp"
#include "cmjlab/version.hpp"

namespace cmjlab {

/// Birth-advancing coupling: events at ages <= eps move to age 0, events in
/// (eps, t) move to eps, later events stay put; jump sizes are preserved.
/// The advanced counting process dominates the original pointwise, which is
/// verified on the union of breakpoints before returning. Ages in the result
/// are nondecreasing (ties at 0 and eps), unlike freshly sampled lives.
inline EdgeLife advance_births(const EdgeLife& life, double t, double eps) {
  if (!(eps > 0.0) || !(eps < t)) throw ValidationError("advance_births: need 0 < eps < t");
  EdgeLife out = life;
  for (double& age : out.event_ages) {
    if (age <= eps)
      age = 0.0;
    else if (age < t)
      age = eps;
  }
  for (std::size_t j = 0; j < life.event_ages.size(); ++j) {
    const double s = life.event_ages[j];
    if (xi_at(out, s) < xi_at(life, s) || xi_at(out, out.event_ages[j]) < xi_at(life, out.event_ages[j]))
      throw ConsistencyError("advance_births: domination violated");
  }
  return out;
}

/// Offspring distribution with finite support: probs[i] = P(offspring = i).
struct OffspringLaw {
  std::vector<double> probs;

  void validate() const {
    if (probs.empty()) throw ValidationError("OffspringLaw: empty table");
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw ValidationError("OffspringLaw: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("OffspringLaw: probabilities must sum to 1");
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) m += static_cast<double>(i) * probs[i];
    return m;
  }

  /// (sum_i p_i i^k)^(1/k)
  double norm(double k) const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      m += probs[i] * std::pow(static_cast<double>(i), k);
    return std::pow(m, 1.0 / k);
  }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (u < probs[i]) return i;
      u -= probs[i];
    }
    return probs.size() - 1;
  }
};

struct GwProgeny {
  std::uint64_t total = 0;      // all individuals ever born, root included
  bool cap_hit = false;         // exploration stopped at the cap
  bool regime_warning = false;  // law mean >= 1 where subcritical was expected
};

/// Total progeny of a Galton-Watson tree rooted at one individual. The count
/// includes the root; subtract one for the root's descendants alone.
inline GwProgeny gw_total_progeny(const OffspringLaw& law, std::uint64_t cap, Rng& rng) {
  law.validate();
  if (cap == 0) throw ValidationError("gw_total_progeny: cap must be positive");
  GwProgeny res;
  res.regime_warning = law.mean() >= 1.0;
  std::uint64_t pending = 1;
  res.total = 1;
  while (pending > 0) {
    --pending;
    const std::uint64_t kids = law.sample(rng);
    res.total += kids;
    pending += kids;
    if (res.total > cap) {
      res.cap_hit = true;
      return res;
    }
  }
  return res;
}

struct GwGenerationNorm {
  int generation = 0;
  Estimate norm;        // empirical ||G_n||_k
  double bound = 0.0;   // (||law||_k)^n
  bool flagged = false; // lower CI end exceeds the bound
};

struct GwNormReport {
  double law_norm = 0.0;
  std::vector<GwGenerationNorm> generations;
};

/// Empirical generation-size norms of a subcritical Galton-Watson process
/// against the induction bound (||law||_k)^n. Flags any generation whose
/// norm is significantly above its bound (3 SE).
inline GwNormReport gw_norm_check(const OffspringLaw& law, double k, int n_gens,
                                  std::size_t replicas, std::uint64_t seed) {
  law.validate();
  if (!(k >= 1.0)) throw ValidationError("gw_norm_check: k must be >= 1");
  if (n_gens < 0) throw ValidationError("gw_norm_check: n_gens must be >= 0");
  if (replicas < 100) throw ValidationError("gw_norm_check: need at least 100 replicas");
  GwNormReport rep;
  rep.law_norm = law.norm(k);
  if (!(rep.law_norm < 1.0))
    throw ValidationError("gw_norm_check: ||law||_k must be < 1 for the bound to contract");

  std::vector<RunningStat> acc(static_cast<std::size_t>(n_gens) + 1);
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng = make_rng(seed, r, RngLane::kReplica);
    std::uint64_t g = 1;
    acc[0].add(1.0);
    for (int n = 1; n <= n_gens; ++n) {
      std::uint64_t next = 0;
      for (std::uint64_t i = 0; i < g; ++i) next += law.sample(rng);
      g = next;
      acc[static_cast<std::size_t>(n)].add(std::pow(static_cast<double>(g), k));
    }
  }
  for (int n = 0; n <= n_gens; ++n) {
    GwGenerationNorm gen;
    gen.generation = n;
    gen.norm = n == 0 ? Estimate{1.0, 0.0, replicas}
                      : norm_from_kth_moments(acc[static_cast<std::size_t>(n)], k);
    gen.bound = std::pow(rep.law_norm, n);
    gen.flagged = gen.norm.value - 3.0 * gen.norm.se > gen.bound;
    rep.generations.push_back(gen);
  }
  return rep;
}

/// Family-tree node; children are kept ordered by birth time (ties keep
/// insertion order). A child born at the same instant as its parent is the
/// "red" case the relabeling algorithm eliminates.
struct FamilyNode {
  double birth_time = 0.0;
  std::vector<FamilyNode> children;

  bool operator==(const FamilyNode&) const = default;
};

/// Forest of ancestors; label (i) is roots[i-1], label (a_1,...,a_k) walks
/// child indices (1-based).
struct FamilyTree {
  std::vector<FamilyNode> roots;

  bool operator==(const FamilyTree&) const = default;
};

namespace detail {

inline void validate_node(const FamilyNode& node, const std::vector<int>& label) {
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    const FamilyNode& child = node.children[i];
    if (child.birth_time < node.birth_time) {
      std::string path;
      for (int a : label) path += std::to_string(a) + ".";
      throw ValidationError("FamilyTree: child born before its parent at label " + path +
                            std::to_string(i + 1));
    }
    if (i > 0 && child.birth_time < node.children[i - 1].birth_time) {
      std::string path;
      for (int a : label) path += std::to_string(a) + ".";
      throw ValidationError("FamilyTree: children not in birth order at label " + path +
                            std::to_string(i + 1));
    }
    auto child_label = label;
    child_label.push_back(static_cast<int>(i) + 1);
    validate_node(child, child_label);
  }
}

}  // namespace detail

inline void validate_tree(const FamilyTree& tree) {
  for (std::size_t i = 0; i < tree.roots.size(); ++i)
    detail::validate_node(tree.roots[i], {static_cast<int>(i) + 1});
}

/// Number of nodes with birth_time <= t.
inline std::uint64_t births_up_to(const FamilyTree& tree, double t) {
  std::uint64_t count = 0;
  auto walk = [&](auto&& self, const FamilyNode& node) -> void {
    if (node.birth_time <= t) ++count;
    for (const auto& child : node.children) self(self, child);
  };
  for (const auto& root : tree.roots) walk(walk, root);
  return count;
}

enum class RelabelStatus { kDone, kCapHit };

struct RelabelResult {
  FamilyTree tree;
  RelabelStatus status = RelabelStatus::kDone;
  std::size_t steps = 0;
};

namespace detail {

// Shortlex-first red label of length `depth` (depth >= 2): lexicographic
// scan of the depth-d slice. Returns the 1-based index path, or empty.
inline bool first_red_at_depth(const std::vector<FamilyNode>& siblings, double parent_birth,
                               int depth, std::vector<int>& path) {
  for (std::size_t i = 0; i < siblings.size(); ++i) {
    const FamilyNode& node = siblings[i];
    if (depth == 1) {
      if (parent_birth == node.birth_time) {
        path.push_back(static_cast<int>(i) + 1);
        return true;
      }
    } else {
      path.push_back(static_cast<int>(i) + 1);
      if (first_red_at_depth(node.children, node.birth_time, depth - 1, path)) return true;
      path.pop_back();
    }
  }
  return false;
}

}  // namespace detail

/// Red-label elimination: repeatedly take the shortlex-first label whose
/// node shares its parent's birth time and promote that node to be a sibling
/// of its parent, inserted right after the block of coevals at the parent's
/// level; the vacated sibling indices compress. Birth times never change,
/// only the family relations. Stops when no label of length <= depth_cap is
/// red; deeper reds may remain. CapHit is returned with the partial tree if
/// the defensive step guard trips (cannot happen for a valid finite tree,
/// where each step recolors one red node black).
inline RelabelResult relabel_tree(const FamilyTree& input, std::size_t depth_cap) {
  if (depth_cap < 1) throw ValidationError("relabel_tree: depth_cap must be >= 1");
  validate_tree(input);
  RelabelResult res;
  res.tree = input;
  const std::size_t initial_nodes = births_up_to(res.tree, std::numeric_limits<double>::infinity());
  const std::size_t step_guard = 4 * initial_nodes + 16;

  for (;;) {
    // find the shortlex-first red label, shallowest depth first
    std::vector<int> path;
    bool found = false;
    for (int depth = 2; depth <= static_cast<int>(depth_cap) && !found; ++depth) {
      // depth counts label length; roots are depth 1 and never red
      for (std::size_t i = 0; i < res.tree.roots.size() && !found; ++i) {
        path.clear();
        path.push_back(static_cast<int>(i) + 1);
        found = detail::first_red_at_depth(res.tree.roots[i].children,
                                           res.tree.roots[i].birth_time, depth - 1, path);
      }
    }
    if (!found) break;
    if (res.steps >= step_guard) {
      res.status = RelabelStatus::kCapHit;
      return res;
    }

    // locate the parent's sibling list and the parent/node positions
    std::vector<FamilyNode>* siblings = &res.tree.roots;
    for (std::size_t d = 0; d + 2 < path.size(); ++d)
      siblings = &(*siblings)[static_cast<std::size_t>(path[d]) - 1].children;
    const std::size_t parent_idx = static_cast<std::size_t>(path[path.size() - 2]) - 1;
    const std::size_t node_idx = static_cast<std::size_t>(path.back()) - 1;
    FamilyNode& parent = (*siblings)[parent_idx];
    const double birth = parent.children[node_idx].birth_time;

    // b-1 = last index (1-based) among the parent's siblings sharing the
    // node's birth time; the promoted node lands at position b
    std::size_t insert_pos = 0;
    for (std::size_t x = 0; x < siblings->size(); ++x)
      if ((*siblings)[x].birth_time == birth) insert_pos = x + 1;

    FamilyNode promoted = std::move(parent.children[node_idx]);
    parent.children.erase(parent.children.begin() + static_cast<std::ptrdiff_t>(node_idx));
    siblings->insert(siblings->begin() + static_cast<std::ptrdiff_t>(insert_pos),
                     std::move(promoted));
    ++res.steps;
  }
  return res;
}

inline constexpr const char* kTreeSchema = "cmjlab.family_tree/1";

inline nlohmann::ordered_json tree_json(const FamilyTree& tree) {
  nlohmann::ordered_json doc;
  doc["schema"] = kTreeSchema;
  doc["tool_version"] = kVersion;
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  std::vector<int> label;
  auto walk = [&](auto&& self, const FamilyNode& node) -> void {
    nodes.push_back({{"label", label}, {"birth_time", node.birth_time}});
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      label.push_back(static_cast<int>(i) + 1);
      self(self, node.children[i]);
      label.pop_back();
    }
  };
  for (std::size_t i = 0; i < tree.roots.size(); ++i) {
    label = {static_cast<int>(i) + 1};
    walk(walk, tree.roots[i]);
  }
  return doc;
}

/// Parse a flat node list back into a forest. Labels must form a
/// prefix-closed set with contiguous 1-based sibling indices; the first
/// offending node is named otherwise.
inline FamilyTree tree_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != kTreeSchema)
    throw ValidationError("tree_from_json: unknown schema");
  struct Entry {
    std::vector<int> label;
    double birth = 0.0;
  };
  std::vector<Entry> entries;
  for (const auto& rec : doc.at("nodes"))
    entries.push_back({rec.at("label").get<std::vector<int>>(), rec.at("birth_time").get<double>()});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.label.size() != b.label.size()) return a.label.size() < b.label.size();
    return a.label < b.label;
  });
  FamilyTree tree;
  for (const auto& entry : entries) {
    std::string name;
    for (int a : entry.label) name += (name.empty() ? "" : ".") + std::to_string(a);
    if (entry.label.empty()) throw ValidationError("tree_from_json: empty label");
    std::vector<FamilyNode>* siblings = &tree.roots;
    for (std::size_t d = 0; d + 1 < entry.label.size(); ++d) {
      const int a = entry.label[d];
      if (a < 1 || static_cast<std::size_t>(a) > siblings->size())
        throw ValidationError("tree_from_json: missing ancestor of node " + name);
      siblings = &(*siblings)[static_cast<std::size_t>(a) - 1].children;
    }
    if (entry.label.back() != static_cast<int>(siblings->size()) + 1)
      throw ValidationError("tree_from_json: non-contiguous sibling index at node " + name);
    siblings->push_back({entry.birth, {}});
  }
  validate_tree(tree);
  return tree;
}

}  // namespace cmjlab
