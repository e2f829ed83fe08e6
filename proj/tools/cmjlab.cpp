// cmjlab -- command-line front end for the CMJ / collaboration-model lab.
//
// Subcommands: solve, simulate, moments, maxdeg, relabel, crosscheck.
// Exit codes: 0 success, 1 input or numerical error, 2 regime gate
// (not supercritical / k below threshold), 3 cap hit.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmjlab/cmj.hpp"
#include "cmjlab/collab_graph.hpp"
#include "cmjlab/coupling.hpp"
#include "cmjlab/io.hpp"
#include "cmjlab/malthus.hpp"
#include "cmjlab/moments.hpp"
#include "cmjlab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRegime = 2;
constexpr int kExitCapHit = 3;

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  int points = 11;
  bool log_spaced = false;

  std::vector<double> make() const {
    if (points < 2) throw cmjlab::ValidationError("grid: points must be >= 2");
    if (!(stop > start)) throw cmjlab::ValidationError("grid: stop must exceed start");
    if (log_spaced && !(start > 0.0))
      throw cmjlab::ValidationError("grid: log spacing needs start > 0");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double f = static_cast<double>(i) / (points - 1);
      g.push_back(log_spaced ? start * std::pow(stop / start, f)
                             : start + (stop - start) * f);
    }
    return g;
  }

  std::string str() const {
    return cmjlab::fmt_double(start) + ":" + cmjlab::fmt_double(stop) + ":" +
           std::to_string(points) + (log_spaced ? ":log" : ":lin");
  }
};

GridSpec parse_grid(const std::string& text) {
  GridSpec spec;
  std::stringstream ss(text);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() < 3 || parts.size() > 4)
    throw cmjlab::ValidationError("grid: expected start:stop:points[:log|:lin]");
  spec.start = std::stod(parts[0]);
  spec.stop = std::stod(parts[1]);
  spec.points = std::stoi(parts[2]);
  if (parts.size() == 4) {
    if (parts[3] == "log")
      spec.log_spaced = true;
    else if (parts[3] != "lin")
      throw cmjlab::ValidationError("grid: spacing must be 'log' or 'lin'");
  }
  return spec;
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("CMJLAB_OUT_DIR")) return env;
  return ".";
}

// every output embeds the effective configuration for exact reproduction
ordered_json config_echo(const std::string& subcommand, const ordered_json& options) {
  ordered_json doc;
  doc["tool"] = "cmjlab";
  doc["tool_version"] = cmjlab::kVersion;
  doc["subcommand"] = subcommand;
  doc["options"] = options;
  return doc;
}

std::string csv_with_config(const ordered_json& config, const std::string& header,
                            const std::string& body) {
  return "# " + config.dump() + "\n" + header + body;
}

struct CommonOpts {
  double b = 1.0, c = 1.0, p = 0.5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir = default_out_dir().string();

  cmjlab::ModelParams params() const { return {b, c, p}; }

  void add_model_flags(CLI::App* cmd) {
    cmd->add_option("--b", b, "baseline death hazard (> 0)")->required();
    cmd->add_option("--c", c, "hazard increment per offspring (> 0)")->required();
    cmd->add_option("--p", p, "probability of a jump-2 event, in [0,1]")->required();
  }
  void add_run_flags(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--threads", threads, "replica fan-out cap");
    cmd->add_option("--out-dir", out_dir, "output directory (env CMJLAB_OUT_DIR)");
  }
  // threads is an execution knob with no effect on results, so it stays out
  // of the reproducibility echo
  ordered_json echo() const {
    return {{"b", b}, {"c", c}, {"p", p}, {"seed", seed}};
  }
};

int cmd_solve(const CommonOpts& common, const std::vector<double>& ks, double tol,
              const std::string& out_name) {
  const auto params = common.params();
  const auto report = cmjlab::solve_all(params, ks, tol);
  ordered_json doc = cmjlab::to_json(report);
  ordered_json opts = common.echo();
  opts["k_list"] = ks;
  opts["tol"] = tol;
  doc["config"] = config_echo("solve", opts);
  cmjlab::write_text_atomic(fs::path(common.out_dir) / out_name, doc.dump(2) + "\n");
  if (!report.supercritical()) {
    std::cerr << "not supercritical: f(0) = " << report.repro_mean << " <= 1\n";
    return kExitRegime;
  }
  return kExitOk;
}

int cmd_simulate(const CommonOpts& common, double horizon, std::uint64_t budget,
                 std::size_t replicas, const GridSpec& grid_spec, bool aggregate,
                 const std::vector<double>& snapshot_times, const std::string& prefix) {
  const auto params = common.params();
  const auto grid = grid_spec.make();
  if (grid.back() > horizon) throw cmjlab::ValidationError("grid extends past the horizon");
  ordered_json opts = common.echo();
  opts["horizon"] = horizon;
  opts["event_budget"] = budget;
  opts["replicas"] = replicas;
  opts["grid"] = grid_spec.str();
  opts["aggregate"] = aggregate;
  const ordered_json config = config_echo("simulate", opts);

  const std::string header =
      "t,vertices,living_edges,total_edges,max_degree_living,max_degree_with_blue,"
      "argmax_vertex_birth_time\n";
  struct Row {
    cmjlab::GraphCounts counts;
    std::uint32_t max_living = 0, max_blue = 0;
    double argmax_birth = 0.0;
  };
  std::vector<std::vector<Row>> rows(replicas);
  std::vector<std::uint8_t> exhausted(replicas, 0);
  cmjlab::for_each_replica(replicas, common.threads, [&](std::size_t r) {
    const auto path = cmjlab::run_collab(params, horizon, budget,
                                         cmjlab::replica_seed(common.seed, r));
    exhausted[r] = path.exhausted_budget;
    const auto living = cmjlab::max_degree_series(path, grid, cmjlab::DegreeMode::kLiving);
    const auto blue = cmjlab::max_degree_series(path, grid, cmjlab::DegreeMode::kWithBlue);
    rows[r].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      rows[r][i].counts = cmjlab::graph_counts(path, grid[i]);
      rows[r][i].max_living = living.values[i];
      rows[r][i].max_blue = blue.values[i];
      rows[r][i].argmax_birth = living.argmax_birth_time[i];
    }
    if (r == 0)
      for (double st : snapshot_times) {
        const auto snap = cmjlab::snapshot_json(path, st);
        cmjlab::write_text_atomic(fs::path(common.out_dir) /
                                      (prefix + "_snapshot_t" + cmjlab::fmt_double(st) + ".json"),
                                  snap.dump(2) + "\n");
      }
  });

  using cmjlab::fmt_double;
  if (aggregate) {
    std::string body;
    std::string agg_header =
        "t,vertices_mean,vertices_se,living_edges_mean,living_edges_se,total_edges_mean,"
        "total_edges_se,max_degree_living_mean,max_degree_living_se,max_degree_with_blue_mean,"
        "max_degree_with_blue_se,argmax_vertex_birth_time_mean,argmax_vertex_birth_time_se\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      cmjlab::RunningStat v, le, te, ml, mb, ab;
      for (std::size_t r = 0; r < replicas; ++r) {
        v.add(static_cast<double>(rows[r][i].counts.vertices));
        le.add(static_cast<double>(rows[r][i].counts.living_edges));
        te.add(static_cast<double>(rows[r][i].counts.total_edges));
        ml.add(rows[r][i].max_living);
        mb.add(rows[r][i].max_blue);
        ab.add(rows[r][i].argmax_birth);
      }
      body += cmjlab::csv_row({fmt_double(grid[i]), fmt_double(v.mean()), fmt_double(v.se()),
                               fmt_double(le.mean()), fmt_double(le.se()), fmt_double(te.mean()),
                               fmt_double(te.se()), fmt_double(ml.mean()), fmt_double(ml.se()),
                               fmt_double(mb.mean()), fmt_double(mb.se()), fmt_double(ab.mean()),
                               fmt_double(ab.se())});
    }
    cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + "_agg.csv"),
                              csv_with_config(config, agg_header, body));
  } else {
    for (std::size_t r = 0; r < replicas; ++r) {
      std::string body;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Row& row = rows[r][i];
        body += cmjlab::csv_row(
            {fmt_double(grid[i]), std::to_string(row.counts.vertices),
             std::to_string(row.counts.living_edges), std::to_string(row.counts.total_edges),
             std::to_string(row.max_living), std::to_string(row.max_blue),
             fmt_double(row.argmax_birth)});
      }
      char name[64];
      std::snprintf(name, sizeof(name), "_r%04zu.csv", r);
      cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + name),
                                csv_with_config(config, header, body));
    }
  }
  ordered_json side;
  side["config"] = config;
  side["exhausted_budget"] = ordered_json::array();
  for (std::size_t r = 0; r < replicas; ++r)
    if (exhausted[r]) side["exhausted_budget"].push_back(r);
  cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + "_run.json"),
                            side.dump(2) + "\n");
  return kExitOk;
}

int cmd_moments(const CommonOpts& common, const std::string& char_name, double k,
                const std::string& rate_name, const GridSpec& grid_spec, std::size_t replicas,
                std::uint64_t budget, std::size_t samples, const std::string& prefix) {
  const auto params = common.params();
  if (!(k >= 1.0)) throw cmjlab::ValidationError("moments: k must be >= 1");
  cmjlab::Characteristic chr = char_name == "alive" ? cmjlab::Characteristic::alive()
                                                    : cmjlab::Characteristic::born();
  if (char_name != "alive" && char_name != "born")
    throw cmjlab::ValidationError("moments: --char must be 'born' or 'alive'");

  const auto alpha = cmjlab::solve_malthusian(params);
  double rate = 0.0;
  if (rate_name == "alpha") {
    if (!alpha) {
      std::cerr << "rate alpha requested but the process is not supercritical\n";
      return kExitRegime;
    }
    rate = *alpha;
  } else if (rate_name == "beta") {
    const auto beta = cmjlab::solve_degree_malthusian(params);
    if (!beta) {
      std::cerr << "rate beta requested but the degree process is not supercritical\n";
      return kExitRegime;
    }
    rate = *beta;
  } else {
    rate = std::stod(rate_name);
  }

  ordered_json opts = common.echo();
  opts["char"] = char_name;
  opts["k"] = k;
  opts["rate"] = rate_name;
  opts["rate_value"] = rate;
  opts["grid"] = grid_spec.str();
  opts["replicas"] = replicas;
  opts["event_budget"] = budget;
  opts["samples"] = samples;
  const ordered_json config = config_echo("moments", opts);

  const auto grid = grid_spec.make();
  cmjlab::LkOptions lk_opts;
  lk_opts.event_budget = budget;
  lk_opts.threads = common.threads;
  const auto series = cmjlab::lk_series(params, chr, k, rate, grid, replicas, common.seed,
                                        lk_opts);
  std::string body;
  for (std::size_t i = 0; i < grid.size(); ++i)
    body += cmjlab::csv_row({cmjlab::fmt_double(series.t_grid[i]),
                             cmjlab::fmt_double(series.estimates[i]),
                             cmjlab::fmt_double(series.se[i])});
  cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + ".csv"),
                            csv_with_config(config, "t,estimate,se\n", body));
  ordered_json series_doc;
  series_doc["schema"] = "cmjlab.moment_series/1";
  series_doc["tool_version"] = cmjlab::kVersion;
  series_doc["config"] = config;
  series_doc["k"] = series.k;
  series_doc["rate"] = series.rate;
  series_doc["t_grid"] = series.t_grid;
  series_doc["estimates"] = series.estimates;
  series_doc["se"] = series.se;
  series_doc["replicas"] = series.replicas;
  series_doc["excluded"] = series.excluded;
  cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + ".json"),
                            series_doc.dump(2) + "\n");

  if (k >= 2.0 && alpha) {
    const int ik = static_cast<int>(k);
    const auto bound = cmjlab::bound_report(params, chr, ik, *alpha, grid, replicas, samples,
                                            common.seed, lk_opts);
    ordered_json doc;
    doc["schema"] = "cmjlab.bound_report/1";
    doc["tool_version"] = cmjlab::kVersion;
    doc["config"] = config;
    doc["k"] = bound.k;
    doc["alpha"] = bound.alpha;
    doc["A"] = {{"value", bound.a.value}, {"se", bound.a.se}, {"n", bound.a.n}};
    doc["B"] = {{"value", bound.b.value}, {"se", bound.b.se}, {"n", bound.b.n}};
    doc["m"] = bound.m;
    doc["C"] = bound.c;
    doc["rho"] = bound.rho;
    doc["bound"] = bound.bound;
    doc["series_excluded"] = series.excluded;
    cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + "_bound.json"),
                              doc.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_maxdeg(const CommonOpts& common, std::vector<double> horizons, std::size_t replicas,
               int k, std::uint64_t budget, const std::string& prefix) {
  const auto params = common.params();
  const auto alpha = cmjlab::solve_malthusian(params);
  const auto beta = cmjlab::solve_degree_malthusian(params);
  if (!alpha || !beta) {
    std::cerr << "degree process is not supercritical (beta absent)\n";
    return kExitRegime;
  }
  if (static_cast<double>(k) <= *alpha / *beta) {
    std::cerr << "k = " << k << " too small: requires k > alpha/beta = " << (*alpha / *beta)
              << "\n";
    return kExitRegime;
  }
  ordered_json opts = common.echo();
  opts["horizons"] = horizons;
  opts["replicas"] = replicas;
  opts["k"] = k;
  opts["event_budget"] = budget;
  const ordered_json config = config_echo("maxdeg", opts);

  const auto rep = cmjlab::delta_report(params, horizons, replicas, k, common.seed, budget,
                                        common.threads);
  ordered_json doc;
  doc["schema"] = "cmjlab.delta_report/1";
  doc["tool_version"] = cmjlab::kVersion;
  doc["config"] = config;
  doc["alpha"] = rep.alpha;
  doc["beta"] = rep.beta;
  doc["k"] = rep.k;
  doc["horizons"] = rep.horizons;
  doc["replicas"] = rep.replicas;
  doc["excluded"] = rep.excluded;
  doc["died_out"] = rep.died_out;
  doc["identity_ok"] = rep.identity_ok;
  doc["lk_distance"] = rep.distance;
  doc["lk_distance_se"] = rep.distance_se;
  doc["trend_stat"] = rep.trend_stat;
  doc["trend_pass"] = rep.trend_pass;
  doc["liminf_proxy_mean"] = rep.liminf_proxy_mean;
  cmjlab::write_text_atomic(fs::path(common.out_dir) / (prefix + ".json"), doc.dump(2) + "\n");

  std::string body;
  for (std::size_t r = 0; r < rep.scaled_max.size(); ++r)
    for (std::size_t j = 0; j < rep.horizons.size(); ++j)
      body += cmjlab::csv_row(
          {std::to_string(r), cmjlab::fmt_double(rep.horizons[j]),
           cmjlab::fmt_double(rep.scaled_max[r][j]), cmjlab::fmt_double(rep.plugin[r][j]),
           cmjlab::fmt_double(rep.plugin_last[r]),
           rep.plugin[r][j] >= rep.scaled_max[r][j] ? "1" : "0"});
  cmjlab::write_text_atomic(
      fs::path(common.out_dir) / (prefix + "_replicas.csv"),
      csv_with_config(config, "replica,horizon,scaled_max,plugin,plugin_at_tmax,identity_ok\n",
                      body));
  return kExitOk;
}

int cmd_relabel(const std::string& input, const std::string& output, std::size_t cap) {
  const auto doc = nlohmann::json::parse(cmjlab::read_text(input));
  const auto tree = cmjlab::tree_from_json(doc);
  const auto result = cmjlab::relabel_tree(tree, cap);
  ordered_json out = cmjlab::tree_json(result.tree);
  out["relabel_steps"] = result.steps;
  out["cap_hit"] = result.status == cmjlab::RelabelStatus::kCapHit;
  cmjlab::write_text_atomic(output, out.dump(2) + "\n");
  if (result.status == cmjlab::RelabelStatus::kCapHit) {
    std::cerr << "cap hit after " << result.steps << " steps; partial tree written\n";
    return kExitCapHit;
  }
  return kExitOk;
}

int cmd_crosscheck(const CommonOpts& common, double horizon, std::size_t replicas,
                   std::vector<double> ages, std::size_t n, const std::string& out_name) {
  const auto params = common.params();
  const auto alpha = cmjlab::solve_malthusian(params);
  if (!alpha) {
    std::cerr << "crosscheck needs a supercritical edge process\n";
    return kExitRegime;
  }
  ordered_json opts = common.echo();
  opts["horizon"] = horizon;
  opts["replicas"] = replicas;
  opts["ages"] = ages;
  opts["n"] = n;
  const ordered_json config = config_echo("crosscheck", opts);

  const auto report = cmjlab::degree_cmj_crosscheck(params, horizon, replicas, common.seed, ages,
                                                    200000, common.threads);
  ordered_json doc;
  doc["schema"] = "cmjlab.crosscheck/1";
  doc["tool_version"] = cmjlab::kVersion;
  doc["config"] = config;
  doc["alpha"] = *alpha;
  doc["two_ancestor_fraction"] = report.two_ancestor_fraction;
  auto& pts = doc["degree_points"] = ordered_json::array();
  bool all_agree = true;
  for (const auto& pt : report.points) {
    all_agree = all_agree && pt.agrees();
    pts.push_back({{"age", pt.age},
                   {"standalone_mean", pt.standalone.value},
                   {"standalone_se", pt.standalone.se},
                   {"standalone_n", pt.standalone.n},
                   {"in_graph_mean", pt.in_graph.value},
                   {"in_graph_se", pt.in_graph.se},
                   {"in_graph_n", pt.in_graph.n},
                   {"agrees_3se", pt.agrees()}});
  }
  doc["degree_all_agree_3se"] = all_agree;

  auto& mc = doc["discounted_reproduction"] = ordered_json::array();
  for (double mult : {1.0, 2.0}) {
    const double theta = mult * *alpha;
    const auto est = cmjlab::mc_discounted_reproduction(params, theta, n, common.seed + 17);
    const double quad = cmjlab::reproduction_laplace(params, theta);
    mc.push_back({{"theta", theta},
                  {"mc_mean", est.value},
                  {"mc_se", est.se},
                  {"quadrature", quad},
                  {"agrees_3se", std::abs(est.value - quad) <= 3.0 * est.se}});
  }
  cmjlab::write_text_atomic(fs::path(common.out_dir) / out_name, doc.dump(2) + "\n");
  std::cout << (all_agree ? "crosscheck: degree curves agree within 3 SE\n"
                          : "crosscheck: disagreement beyond 3 SE\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMJ branching-process and collaboration-graph laboratory"};
  app.set_version_flag("--version", cmjlab::kVersion);
  app.set_config("--config", "", "read options from an INI/TOML file");
  app.require_subcommand(1);

  CommonOpts common;

  // solve
  auto* solve = app.add_subcommand("solve", "growth rates, extinction root, discounts");
  std::vector<double> ks{2.0, 3.0};
  double tol = 1e-9;
  std::string solve_out = "solve.json";
  common.add_model_flags(solve);
  common.add_run_flags(solve);
  solve->add_option("--k,--k-list", ks, "orders for the discount factors");
  solve->add_option("--tol", tol, "root residual tolerance");
  solve->add_option("--out", solve_out, "report file name");

  // simulate
  auto* sim = app.add_subcommand("simulate", "collaboration-graph time series");
  double sim_horizon = 5.0;
  std::uint64_t sim_budget = 1000000;
  std::size_t sim_replicas = 1;
  std::string sim_grid = "0:5:11";
  bool sim_aggregate = false;
  std::vector<double> sim_snapshots;
  std::string sim_prefix = "simulate";
  common.add_model_flags(sim);
  common.add_run_flags(sim);
  sim->add_option("--horizon", sim_horizon, "simulation horizon")->required();
  sim->add_option("--budget", sim_budget, "edge budget per replica");
  sim->add_option("--replicas", sim_replicas, "number of replicas");
  sim->add_option("--grid", sim_grid, "time grid start:stop:points[:log|:lin]");
  sim->add_flag("--aggregate", sim_aggregate, "one CSV of per-time mean/SE over replicas");
  sim->add_option("--snapshot-times", sim_snapshots, "JSON graph snapshots (replica 0)");
  sim->add_option("--prefix", sim_prefix, "output file prefix");

  // moments
  auto* mom = app.add_subcommand("moments", "normalized L_k series and moment bound");
  std::string mom_char = "born";
  double mom_k = 1.0;
  std::string mom_rate = "alpha";
  std::string mom_grid = "0:8:20";
  std::size_t mom_replicas = 500;
  std::uint64_t mom_budget = 2000000;
  std::size_t mom_samples = 100000;
  std::string mom_prefix = "moments";
  common.add_model_flags(mom);
  common.add_run_flags(mom);
  mom->add_option("--char", mom_char, "characteristic: born|alive");
  mom->add_option("--k", mom_k, "L_k order (>= 1)")->required();
  mom->add_option("--rate", mom_rate, "normalization: alpha|beta|<number>");
  mom->add_option("--grid", mom_grid, "time grid start:stop:points[:log|:lin]");
  mom->add_option("--replicas", mom_replicas, "Monte Carlo replicas");
  mom->add_option("--budget", mom_budget, "event budget per replica");
  mom->add_option("--samples", mom_samples, "lives sampled for A and B");
  mom->add_option("--prefix", mom_prefix, "output file prefix");

  // maxdeg
  auto* mx = app.add_subcommand("maxdeg", "maximal-degree convergence report");
  std::vector<double> mx_horizons{5.0, 6.5, 8.0, 9.0};
  std::size_t mx_replicas = 100;
  int mx_k = 3;
  std::uint64_t mx_budget = 1000000;
  std::string mx_prefix = "maxdeg";
  common.add_model_flags(mx);
  common.add_run_flags(mx);
  mx->add_option("--horizons", mx_horizons, "increasing horizons");
  mx->add_option("--replicas", mx_replicas, "number of replicas");
  mx->add_option("--k", mx_k, "L_k order (must exceed alpha/beta)");
  mx->add_option("--budget", mx_budget, "edge budget per replica");
  mx->add_option("--prefix", mx_prefix, "output file prefix");

  // relabel
  auto* rel = app.add_subcommand("relabel", "family-tree red-label elimination");
  std::string rel_in, rel_out = "relabeled.json";
  std::size_t rel_cap = 64;
  rel->add_option("--input", rel_in, "family tree JSON")->required();
  rel->add_option("--output", rel_out, "output tree JSON");
  rel->add_option("--cap", rel_cap, "depth cap");

  // crosscheck
  auto* cx = app.add_subcommand("crosscheck", "degree-process and discount cross-validation");
  double cx_horizon = 8.0;
  std::size_t cx_replicas = 20000;
  std::vector<double> cx_ages{0.0, 0.5, 1.0, 2.0, 3.0};
  std::size_t cx_n = 100000;
  std::string cx_out = "crosscheck.json";
  common.add_model_flags(cx);
  common.add_run_flags(cx);
  cx->add_option("--horizon", cx_horizon, "graph horizon");
  cx->add_option("--replicas", cx_replicas, "replicas per side");
  cx->add_option("--ages", cx_ages, "vertex ages to compare");
  cx->add_option("--n", cx_n, "samples for the discount comparison");
  cx->add_option("--out", cx_out, "report file name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(common, ks, tol, solve_out);
    if (sim->parsed())
      return cmd_simulate(common, sim_horizon, sim_budget, sim_replicas, parse_grid(sim_grid),
                          sim_aggregate, sim_snapshots, sim_prefix);
    if (mom->parsed())
      return cmd_moments(common, mom_char, mom_k, mom_rate, parse_grid(mom_grid), mom_replicas,
                         mom_budget, mom_samples, mom_prefix);
    if (mx->parsed()) return cmd_maxdeg(common, mx_horizons, mx_replicas, mx_k, mx_budget,
                                        mx_prefix);
    if (rel->parsed()) return cmd_relabel(rel_in, rel_out, rel_cap);
    if (cx->parsed()) return cmd_crosscheck(common, cx_horizon, cx_replicas, cx_ages, cx_n,
                                            cx_out);
  } catch (const cmjlab::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
