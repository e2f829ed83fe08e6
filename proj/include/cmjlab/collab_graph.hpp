#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmjlab/cmj.hpp"
#include "cmjlab/errors.hpp"
#include "cmjlab/exec.hpp"
#include "cmjlab/point_process.hpp"
#include "cmjlab/rng.hpp"
#include "cmjlab/stats.hpp"
#include "cmjlab/version.hpp"

namespace cmjlab {

enum class DegreeMode {
  kLiving,    // count incident edges currently alive
  kWithBlue,  // dead edges stay counted ("blue"), so degrees never drop
};

struct GraphVertex {
  std::uint64_t id = 0;
  double birth_time = 0.0;

  bool operator==(const GraphVertex&) const = default;
};

struct GraphEdge {
  std::uint64_t id = 0;
  std::uint64_t v1 = 0, v2 = 0;  // endpoints; v2 is the newer vertex for spawned edges
  double birth_time = 0.0;       // absolute
  EdgeLife life;
  /// Per birth event: 0 = new vertex joined endpoint v1's side only,
  /// 1 = joined v2's side only, 2 = joined both (jump-2 event).
  std::vector<std::int8_t> attach_choice;

  bool operator==(const GraphEdge&) const = default;
};

/// Full record of one collaboration-graph run. Starts from two vertices
/// joined by one edge; every birth event adds one vertex and one or two
/// edges, all incident to the new vertex. Vertices are never removed.
struct GraphPath {
  std::vector<GraphVertex> vertices;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<std::uint64_t>> incident;  // vertex id -> incident edge ids
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t event_budget = 0;  // maximum number of edges
  bool exhausted_budget = false;
  double complete_until = 0.0;

  /// Alive at t means born and not yet dead; a truncated life is alive
  /// through the horizon.
  bool edge_alive(const GraphEdge& e, double t) const {
    if (t < e.birth_time) return false;
    return e.life.truncated ? true : t - e.birth_time < e.life.lifetime;
  }
};

/// Simulate the collaboration graph. Edge lives follow the point-process
/// sampler; a jump-2 event joins the new vertex to both endpoints of the
/// parent edge (two new edges), a jump-1 event to a single endpoint chosen
/// by a fair coin. Every new edge starts its own independent life.
/// Deterministic given the seed.
inline GraphPath run_collab(const ModelParams& params, double horizon,
                            std::uint64_t event_budget, std::uint64_t seed) {
  params.validate();
  if (!std::isfinite(horizon) || horizon < 0.0)
    throw ValidationError("run_collab: horizon must be finite and >= 0");
  if (event_budget < 1) throw ValidationError("run_collab: event_budget must cover the seed edge");

  GraphPath path;
  path.horizon = horizon;
  path.seed = seed;
  path.event_budget = event_budget;
  path.complete_until = horizon;

  detail::BirthQueue queue;
  auto add_vertex = [&](double t) {
    path.vertices.push_back({path.vertices.size(), t});
    path.incident.emplace_back();
    return path.vertices.back().id;
  };
  auto add_edge = [&](std::uint64_t v1, std::uint64_t v2, double t) {
    GraphEdge e;
    e.id = path.edges.size();
    e.v1 = v1;
    e.v2 = v2;
    e.birth_time = t;
    Rng life_rng = make_rng(seed, e.id, RngLane::kLife);
    e.life = sample_edge_life(params, horizon - t, life_rng);
    Rng coin_rng = make_rng(seed, e.id, RngLane::kEndpoint);
    e.attach_choice.reserve(e.life.jump_sizes.size());
    for (std::size_t j = 0; j < e.life.jump_sizes.size(); ++j) {
      if (e.life.jump_sizes[j] == 2)
        e.attach_choice.push_back(2);
      else
        e.attach_choice.push_back(coin_rng.bernoulli(0.5) ? 1 : 0);
      queue.push({t + e.life.event_ages[j], e.id, static_cast<std::uint32_t>(j), 1});
    }
    path.incident[v1].push_back(e.id);
    path.incident[v2].push_back(e.id);
    path.edges.push_back(std::move(e));
  };

  add_vertex(0.0);
  add_vertex(0.0);
  add_edge(0, 1, 0.0);

  double last_complete = 0.0;
  while (!queue.empty()) {
    const detail::PendingBirth ev = queue.top();
    queue.pop();
    const GraphEdge& parent = path.edges[ev.parent];
    if (parent.v1 == parent.v2)
      throw std::logic_error("run_collab: self-loop edge; the attachment rules exclude this");
    const std::int8_t choice = parent.attach_choice[ev.event_index];
    const std::size_t new_edges = choice == 2 ? 2 : 1;
    if (path.edges.size() + new_edges > event_budget) {
      path.exhausted_budget = true;
      path.complete_until = last_complete;
      break;
    }
    const std::uint64_t v = add_vertex(ev.time);
    const std::uint64_t pv1 = parent.v1, pv2 = parent.v2;
    if (choice == 2) {
      add_edge(pv1, v, ev.time);
      add_edge(pv2, v, ev.time);
    } else {
      add_edge(choice == 0 ? pv1 : pv2, v, ev.time);
    }
    last_complete = ev.time;
  }
  return path;
}

/// Degree of one vertex at time t. WithBlue keeps dead incident edges in
/// the count, so it is nondecreasing in t.
inline std::uint32_t degree_of(const GraphPath& path, std::uint64_t vertex, double t,
                               DegreeMode mode) {
  if (vertex >= path.vertices.size())
    throw std::out_of_range("degree_of: unknown vertex id");
  if (t > path.horizon) throw std::out_of_range("degree_of: t exceeds the horizon");
  if (path.vertices[vertex].birth_time > t)
    throw ValidationError("degree_of: vertex is not yet born at t");
  std::uint32_t deg = 0;
  for (std::uint64_t eid : path.incident[vertex]) {
    const GraphEdge& e = path.edges[eid];
    if (e.birth_time > t) continue;
    if (mode == DegreeMode::kWithBlue || path.edge_alive(e, t)) ++deg;
  }
  return deg;
}

struct DegreeSeries {
  std::vector<double> t_grid;
  std::vector<std::uint32_t> values;  // M(t) per grid time
  DegreeMode mode = DegreeMode::kLiving;
  std::vector<std::uint64_t> argmax_vertex;      // a vertex attaining M(t)
  std::vector<double> argmax_birth_time;
};

/// Maximal degree M(t) over an increasing time grid, with the attaining
/// vertex recorded per grid point. One sweep over edge birth/death events
/// with a lazy-deletion max-heap, instead of a full O(V) scan per grid time.
inline DegreeSeries max_degree_series(const GraphPath& path, std::span<const double> t_grid,
                                      DegreeMode mode) {
  DegreeSeries series;
  series.mode = mode;
  series.t_grid.assign(t_grid.begin(), t_grid.end());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || t_grid[i] > path.horizon)
      throw std::out_of_range("max_degree_series: grid point outside [0, horizon]");
    if (i > 0 && t_grid[i] < t_grid[i - 1])
      throw ValidationError("max_degree_series: grid must be nondecreasing");
  }

  struct Delta {
    double time;
    std::uint64_t vertex;
    int change;
  };
  std::vector<Delta> deltas;
  deltas.reserve(path.edges.size() * 2);
  for (const auto& e : path.edges) {
    deltas.push_back({e.birth_time, e.v1, +1});
    deltas.push_back({e.birth_time, e.v2, +1});
    if (mode == DegreeMode::kLiving && !e.life.truncated) {
      deltas.push_back({e.birth_time + e.life.lifetime, e.v1, -1});
      deltas.push_back({e.birth_time + e.life.lifetime, e.v2, -1});
    }
  }
  std::sort(deltas.begin(), deltas.end(), [](const Delta& a, const Delta& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.vertex != b.vertex) return a.vertex < b.vertex;
    return a.change < b.change;
  });

  std::vector<std::uint32_t> deg(path.vertices.size(), 0);
  // entries (degree, vertex); max degree wins, earliest vertex on ties
  using HeapEntry = std::pair<std::int64_t, std::int64_t>;
  std::priority_queue<HeapEntry> heap;
  std::size_t next_delta = 0;
  for (std::size_t g = 0; g < series.t_grid.size(); ++g) {
    const double t = series.t_grid[g];
    while (next_delta < deltas.size() && deltas[next_delta].time <= t) {
      const Delta& d = deltas[next_delta++];
      deg[d.vertex] = static_cast<std::uint32_t>(static_cast<int>(deg[d.vertex]) + d.change);
      heap.push({static_cast<std::int64_t>(deg[d.vertex]),
                 -static_cast<std::int64_t>(d.vertex)});
    }
    while (!heap.empty()) {
      const auto [d, negv] = heap.top();
      const std::uint64_t v = static_cast<std::uint64_t>(-negv);
      if (static_cast<std::int64_t>(deg[v]) == d) break;
      heap.pop();  // stale entry
    }
    if (heap.empty()) {
      series.values.push_back(0);
      series.argmax_vertex.push_back(0);
      series.argmax_birth_time.push_back(0.0);
    } else {
      const auto [d, negv] = heap.top();
      const std::uint64_t v = static_cast<std::uint64_t>(-negv);
      series.values.push_back(static_cast<std::uint32_t>(d));
      series.argmax_vertex.push_back(v);
      series.argmax_birth_time.push_back(path.vertices[v].birth_time);
    }
  }
  return series;
}

struct GraphCounts {
  std::uint64_t vertices = 0;
  std::uint64_t living_edges = 0;
  std::uint64_t total_edges = 0;  // born up to t, dead or alive
};

inline GraphCounts graph_counts(const GraphPath& path, double t) {
  if (t > path.horizon) throw std::out_of_range("graph_counts: t exceeds the horizon");
  GraphCounts counts;
  for (const auto& v : path.vertices)
    if (v.birth_time <= t) ++counts.vertices;
  for (const auto& e : path.edges) {
    if (e.birth_time > t) continue;
    ++counts.total_edges;
    if (path.edge_alive(e, t)) ++counts.living_edges;
  }
  return counts;
}

/// Standalone degree process of one vertex: individuals are its incident
/// edges; an edge's mark-1 birth events each add one new incident edge.
/// `ancestors` is the vertex's initial degree (1 or 2 in the model).
inline PopulationPath run_degree_cmj(const ModelParams& params, std::uint32_t ancestors,
                                     double horizon, std::uint64_t event_budget,
                                     std::uint64_t seed) {
  return detail::run_branching(params, ancestors, horizon, event_budget, seed, EngineOptions{},
                               /*with_marks=*/true,
                               [](const Individual& ind, std::uint32_t j) {
                                 return ind.marks->mark_per_event[j];
                               });
}

struct CrosscheckPoint {
  double age = 0.0;
  Estimate standalone;  // mean degree of the standalone process at this age
  Estimate in_graph;    // mean degree of the first vertex born after 0
  bool agrees(double mult = 3.0) const {
    const double se = std::sqrt(standalone.se * standalone.se + in_graph.se * in_graph.se);
    return std::abs(standalone.value - in_graph.value) <= mult * se;
  }
};

struct CrosscheckReport {
  std::vector<CrosscheckPoint> points;
  std::size_t replicas = 0;
  double two_ancestor_fraction = 0.0;  // should match p
};

/// Two independent simulators of the same law, checked against each other:
/// the eta-driven standalone degree CMJ versus the in-graph degree of the
/// first vertex born after time 0. The in-graph side conditions on that
/// vertex existing and on its age fitting under the horizon; both are
/// independent of the degree law, so the comparison is unbiased.
inline CrosscheckReport degree_cmj_crosscheck(const ModelParams& params, double horizon,
                                              std::size_t replicas, std::uint64_t seed,
                                              std::span<const double> ages,
                                              std::uint64_t event_budget = 200000,
                                              unsigned threads = 1) {
  params.validate();
  if (replicas < 2) throw ValidationError("degree_cmj_crosscheck: need at least 2 replicas");
  for (double a : ages)
    if (a < 0.0 || a > horizon)
      throw ValidationError("degree_cmj_crosscheck: ages must lie in [0, horizon]");

  std::vector<std::vector<double>> standalone_vals(replicas), graph_vals(replicas);
  std::vector<int> anc_count(replicas, 0);
  for_each_replica(replicas, threads, [&](std::size_t r) {
    const std::uint64_t rs = replica_seed(seed, r);
    Rng anc_rng(derive_stream(rs, 0, RngLane::kAncestor));
    const std::uint32_t ancestors = anc_rng.bernoulli(params.p) ? 2 : 1;
    anc_count[r] = static_cast<int>(ancestors);
    const auto deg_path = run_degree_cmj(params, ancestors, horizon, event_budget, rs);
    const Characteristic alive = Characteristic::alive();
    standalone_vals[r].reserve(ages.size());
    for (double a : ages)
      standalone_vals[r].push_back(deg_path.exhausted_budget && a > deg_path.complete_until
                                       ? -1.0
                                       : z_phi(deg_path, alive, a));

    const auto graph = run_collab(params, horizon, event_budget,
                                  derive_stream(rs, 1, RngLane::kMisc));
    graph_vals[r].assign(ages.size(), -1.0);
    if (graph.vertices.size() > 2) {
      const double tau = graph.vertices[2].birth_time;
      for (std::size_t i = 0; i < ages.size(); ++i) {
        const double t = tau + ages[i];
        if (t <= horizon && !(graph.exhausted_budget && t > graph.complete_until))
          graph_vals[r][i] = degree_of(graph, 2, t, DegreeMode::kLiving);
      }
    }
  });

  CrosscheckReport report;
  report.replicas = replicas;
  double twos = 0;
  for (int a : anc_count) twos += (a == 2);
  report.two_ancestor_fraction = twos / static_cast<double>(replicas);
  for (std::size_t i = 0; i < ages.size(); ++i) {
    CrosscheckPoint pt;
    pt.age = ages[i];
    RunningStat sa, sg;
    for (std::size_t r = 0; r < replicas; ++r) {
      if (standalone_vals[r][i] >= 0.0) sa.add(standalone_vals[r][i]);
      if (graph_vals[r][i] >= 0.0) sg.add(graph_vals[r][i]);
    }
    pt.standalone = sa.estimate();
    pt.in_graph = sg.estimate();
    report.points.push_back(pt);
  }
  return report;
}

struct IsolationResult {
  Estimate frequency;            // fraction of replicas whose vertex became isolated
  std::size_t extinct = 0;       // all incident edges died, none pending
  std::size_t survived_cap = 0;  // hit the edge budget (treated as survival)
  std::size_t undecided = 0;     // still alive at the horizon (treated as survival)
};

/// Monte Carlo isolation frequency of a newborn vertex: its degree process
/// starts with 1 incident edge (probability q) or 2 (probability p) and the
/// vertex is isolated iff that process dies out. Replicas still alive at the
/// horizon or stopped by the budget are counted as survivors; pick
/// horizon/budget large enough that they are rare or genuinely supercritical.
inline IsolationResult isolation_frequency_mc(const ModelParams& params, std::size_t replicas,
                                              double horizon, std::uint64_t event_budget,
                                              std::uint64_t seed, unsigned threads = 1) {
  params.validate();
  if (replicas < 2) throw ValidationError("isolation_frequency_mc: need at least 2 replicas");
  std::vector<std::uint8_t> outcome(replicas, 0);  // 0 extinct, 1 cap, 2 undecided
  for_each_replica(replicas, threads, [&](std::size_t r) {
    const std::uint64_t rs = replica_seed(seed, r);
    Rng anc_rng(derive_stream(rs, 0, RngLane::kAncestor));
    const std::uint32_t ancestors = anc_rng.bernoulli(params.p) ? 2 : 1;
    const auto path = run_degree_cmj(params, ancestors, horizon, event_budget, rs);
    if (path.exhausted_budget) {
      outcome[r] = 1;
      return;
    }
    for (const auto& ind : path.individuals)
      if (ind.life.truncated) {
        outcome[r] = 2;
        return;
      }
    outcome[r] = 0;
  });
  IsolationResult res;
  RunningStat stat;
  for (auto o : outcome) {
    res.extinct += (o == 0);
    res.survived_cap += (o == 1);
    res.undecided += (o == 2);
    stat.add(o == 0 ? 1.0 : 0.0);
  }
  res.frequency = stat.estimate();
  return res;
}

inline constexpr const char* kSnapshotSchema = "cmjlab.graph_snapshot/1";

/// JSON snapshot of the graph state at time t.
inline nlohmann::ordered_json snapshot_json(const GraphPath& path, double t) {
  if (t > path.horizon) throw std::out_of_range("snapshot_json: t exceeds the horizon");
  nlohmann::ordered_json doc;
  doc["schema"] = kSnapshotSchema;
  doc["tool_version"] = kVersion;
  doc["seed"] = path.seed;
  doc["t"] = t;
  auto& verts = doc["vertices"] = nlohmann::ordered_json::array();
  for (const auto& v : path.vertices) {
    if (v.birth_time > t) continue;
    verts.push_back({{"id", v.id}, {"birth_time", v.birth_time}});
  }
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : path.edges) {
    if (e.birth_time > t) continue;
    edges.push_back({{"id", e.id},
                     {"v1", e.v1},
                     {"v2", e.v2},
                     {"birth_time", e.birth_time},
                     {"alive", path.edge_alive(e, t)}});
  }
  return doc;
}

}  // namespace cmjlab
