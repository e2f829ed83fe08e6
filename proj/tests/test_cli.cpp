#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cmjlab/io.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CMJLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cmjlab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool no_partial_files(const fs::path& dir) {
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.path().string().ends_with(".partial")) return false;
  return true;
}

}  // namespace

TEST_CASE("solve subcommand writes a report and gates on the regime") {
  const auto dir = fresh_dir("solve");
  REQUIRE(run_cli("solve --b 0.1 --c 0.1 --p 0.5 --out-dir " + dir.string()) == 0);
  const auto doc = nlohmann::json::parse(cmjlab::read_text(dir / "solve.json"));
  CHECK(doc.at("supercritical").get<bool>());
  CHECK(doc.at("beta").get<double>() < doc.at("alpha").get<double>());
  CHECK(doc.at("config").at("options").at("seed").get<int>() == 1);
  CHECK(doc.at("config").at("tool_version").is_string());

  // not supercritical: exit 2, report still written with null roots
  REQUIRE(run_cli("solve --b 1000 --c 1 --p 0 --out-dir " + dir.string()) == 2);
  const auto sub = nlohmann::json::parse(cmjlab::read_text(dir / "solve.json"));
  CHECK(sub.at("alpha").is_null());

  // validation failures name the field and exit 1
  CHECK(run_cli("solve --b -1 --c 1 --p 0 --out-dir " + dir.string()) == 1);
  CHECK(run_cli("solve --b 1 --c 1 --p 7 --out-dir " + dir.string()) == 1);
  CHECK(no_partial_files(dir));
}

TEST_CASE("simulate emits the documented schema and is byte-stable") {
  const auto dir = fresh_dir("simulate");
  const std::string common =
      " --b 1 --c 1 --p 0.5 --horizon 2 --grid 0:2:5 --seed 9 --out-dir ";
  REQUIRE(run_cli("simulate" + common + dir.string() + " --replicas 2") == 0);
  const std::string csv = cmjlab::read_text(dir / "simulate_r0000.csv");
  // header after the config-echo comment line
  CHECK(csv.find("t,vertices,living_edges,total_edges,max_degree_living,max_degree_with_blue,"
                 "argmax_vertex_birth_time\n") != std::string::npos);
  CHECK(csv.substr(0, 2) == "# ");
  // first data row: the initial state
  const auto header_end = csv.find("argmax_vertex_birth_time\n");
  const std::string first_row = csv.substr(csv.find('\n', header_end) + 1, 14);
  CHECK(first_row.substr(0, 8) == "0,2,1,1,");

  const auto dir2 = fresh_dir("simulate2");
  REQUIRE(run_cli("simulate" + common + dir2.string() + " --replicas 2") == 0);
  CHECK(cmjlab::read_text(dir / "simulate_r0000.csv") ==
        cmjlab::read_text(dir2 / "simulate_r0000.csv"));
  CHECK(cmjlab::read_text(dir / "simulate_r0001.csv") ==
        cmjlab::read_text(dir2 / "simulate_r0001.csv"));

  // aggregated mode carries mean/se columns
  REQUIRE(run_cli("simulate" + common + dir.string() + " --aggregate --replicas 20") == 0);
  const std::string agg = cmjlab::read_text(dir / "simulate_agg.csv");
  CHECK(agg.find("vertices_mean,vertices_se") != std::string::npos);
  CHECK(agg.find("max_degree_living_mean") != std::string::npos);
  CHECK(no_partial_files(dir));
}

TEST_CASE("simulate output is independent of the thread count") {
  const auto dir1 = fresh_dir("threads1");
  const auto dir4 = fresh_dir("threads4");
  const std::string common =
      " --b 0.5 --c 0.5 --p 0.5 --horizon 3 --grid 0:3:7 --replicas 8 --seed 123 ";
  REQUIRE(run_cli("simulate" + common + "--threads 1 --out-dir " + dir1.string()) == 0);
  REQUIRE(run_cli("simulate" + common + "--threads 4 --out-dir " + dir4.string()) == 0);
  for (int r = 0; r < 8; ++r) {
    char name[32];
    std::snprintf(name, sizeof(name), "simulate_r%04d.csv", r);
    CHECK(cmjlab::read_text(dir1 / name) == cmjlab::read_text(dir4 / name));
  }
}

TEST_CASE("moments subcommand validates k and writes series plus bound") {
  const auto dir = fresh_dir("moments");
  CHECK(run_cli("moments --b 0.1 --c 0.1 --p 0.5 --k 0.5 --out-dir " + dir.string()) == 1);
  REQUIRE(run_cli("moments --b 0.1 --c 0.1 --p 0.5 --k 2 --grid 0:4:8 --replicas 150 "
                  "--samples 5000 --seed 4 --out-dir " +
                  dir.string()) == 0);
  const std::string csv = cmjlab::read_text(dir / "moments.csv");
  CHECK(csv.find("t,estimate,se\n") != std::string::npos);
  const auto bound = nlohmann::json::parse(cmjlab::read_text(dir / "moments_bound.json"));
  CHECK(bound.at("m").get<double>() < 1.0);
  CHECK(bound.at("bound").get<double>() > 0.0);
  // rate alpha on a subcritical set gates with exit 2
  CHECK(run_cli("moments --b 1000 --c 1 --p 0 --k 1 --out-dir " + dir.string()) == 2);
  CHECK(no_partial_files(dir));
}

TEST_CASE("maxdeg gates on the regime and the k threshold") {
  const auto dir = fresh_dir("maxdeg");
  // degree process subcritical at these parameters
  CHECK(run_cli("maxdeg --b 1 --c 1 --p 0.5 --out-dir " + dir.string()) == 2);
  // k below alpha/beta ~ 2.62
  CHECK(run_cli("maxdeg --b 0.1 --c 0.1 --p 0.5 --k 2 --out-dir " + dir.string()) == 2);
}

TEST_CASE("relabel round-trips trees through files") {
  const auto dir = fresh_dir("relabel");
  const std::string input = (dir / "tree.json").string();
  const std::string out1 = (dir / "out1.json").string();
  const std::string out2 = (dir / "out2.json").string();
  // the two-node tie: ancestor and its coeval child
  cmjlab::write_text_atomic(input, nlohmann::json{
      {"schema", "cmjlab.family_tree/1"},
      {"nodes", {{{"label", {1}}, {"birth_time", 0.0}},
                 {{"label", {1, 1}}, {"birth_time", 0.0}}}}}.dump());
  REQUIRE(run_cli("relabel --input " + input + " --output " + out1) == 0);
  auto doc = nlohmann::json::parse(cmjlab::read_text(out1));
  REQUIRE(doc.at("nodes").size() == 2);
  CHECK(doc.at("nodes")[0].at("label") == nlohmann::json::array({1}));
  CHECK(doc.at("nodes")[1].at("label") == nlohmann::json::array({2}));
  CHECK(doc.at("cap_hit").get<bool>() == false);

  // idempotence through the file interface
  REQUIRE(run_cli("relabel --input " + out1 + " --output " + out2) == 0);
  auto second = nlohmann::json::parse(cmjlab::read_text(out2));
  CHECK(second.at("nodes") == doc.at("nodes"));

  // malformed input: exit 1
  cmjlab::write_text_atomic(input, nlohmann::json{
      {"schema", "cmjlab.family_tree/1"},
      {"nodes", {{{"label", {1, 2}}, {"birth_time", 0.0}}}}}.dump());
  CHECK(run_cli("relabel --input " + input + " --output " + out1) == 1);
}

TEST_CASE("flags override config-file values and the effective config is echoed") {
  const auto dir = fresh_dir("config");
  const fs::path cfg = dir / "run.ini";
  std::ofstream(cfg) << "[solve]\nb=0.2\nc=0.2\np=0.9\nseed=5\n";
  REQUIRE(run_cli("--config " + cfg.string() + " solve --p 0.25 --out-dir " + dir.string()) ==
          0);
  const auto doc = nlohmann::json::parse(cmjlab::read_text(dir / "solve.json"));
  const auto& opts = doc.at("config").at("options");
  CHECK(opts.at("b").get<double>() == 0.2);     // from the config file
  CHECK(opts.at("p").get<double>() == 0.25);    // flag wins
  CHECK(opts.at("seed").get<int>() == 5);
  CHECK(doc.at("params").at("p").get<double>() == 0.25);
}

TEST_CASE("environment variable supplies the default output directory") {
  const auto dir = fresh_dir("envdir");
  const std::string cmd = "CMJLAB_OUT_DIR=" + dir.string() + " " + CMJLAB_CLI_PATH +
                          " solve --b 0.1 --c 0.1 --p 0.5 >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(dir / "solve.json"));
}

TEST_CASE("crosscheck writes agreement verdicts") {
  const auto dir = fresh_dir("crosscheck");
  REQUIRE(run_cli("crosscheck --b 1 --c 1 --p 0.5 --horizon 3 --replicas 300 --ages 0 1 "
                  "--n 2000 --seed 8 --out-dir " + dir.string() +
                  " --out " + (dir / "crosscheck.json").string()) == 0);
  const auto doc = nlohmann::json::parse(cmjlab::read_text(dir / "crosscheck.json"));
  CHECK(doc.at("degree_points").size() == 2);
  CHECK(doc.at("discounted_reproduction").size() == 2);
  for (const auto& entry : doc.at("discounted_reproduction"))
    CHECK(entry.at("agrees_3se").get<bool>());
}
