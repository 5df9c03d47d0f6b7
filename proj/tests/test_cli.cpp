#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wavedyn/experiments.hpp"

using namespace wavedyn;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::path("cli_test_out") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json minimal_simulate_config() {
  return json{{"experiment", "simulate"},
              {"mesh", {{"n_cells", 32}}},
              {"problem", {{"kind", "R"}}},
              {"time", {{"horizon", 0.1}, {"dt", 1e-3}, {"stride", 10}}},
              {"initial", {{"kind", "cosine_profile"}}},
              {"seed", 7}};
}

}  // namespace

TEST_CASE("defaults parse and carry the documented values") {
  ExperimentConfig c = parse_config(json::object());
  REQUIRE(c.experiment == "check");
  REQUIRE(c.mesh.n_cells == 200);
  REQUIRE(c.problem.kind == "R");
  REQUIRE(c.nonlinearity.name == "cubic");
  REQUIRE(c.boundary.name == "zero");
  REQUIRE(c.solver.tolerance == 1e-11);
  REQUIRE(c.seed == 12345);
}

TEST_CASE("trajectory experiments require an explicit step size") {
  json cfg = minimal_simulate_config();
  cfg.erase("time");
  bool threw = false;
  try {
    parse_config(cfg);
  } catch (const ConfigError& e) {
    threw = true;
    REQUIRE(std::string(e.what()).find("time") != std::string::npos);
  }
  REQUIRE(threw);

  cfg["time"] = {{"horizon", 1.0}};  // dt still missing
  threw = false;
  try {
    parse_config(cfg);
  } catch (const ConfigError& e) {
    threw = true;
    REQUIRE(std::string(e.what()).find("time.dt") != std::string::npos);
  }
  REQUIRE(threw);
}

TEST_CASE("validation reports the offending field") {
  json cfg = minimal_simulate_config();
  cfg["mesh"]["n_cellz"] = 3;
  REQUIRE_THROWS_AS(parse_config(cfg), ConfigError);

  cfg = minimal_simulate_config();
  cfg["problem"]["kind"] = "A";
  cfg["problem"]["epsilon"] = 0.0;
  bool threw = false;
  try {
    parse_config(cfg);
  } catch (const ConfigError& e) {
    threw = true;
    REQUIRE(std::string(e.what()).find("problem.epsilon") !=
            std::string::npos);
  }
  REQUIRE(threw);

  cfg = minimal_simulate_config();
  cfg["nonlinearity"] = {{"name", "cubic_minus_linear"}, {"lambda", 1.0}};
  REQUIRE_THROWS_AS(parse_config(cfg), ConfigError);

  cfg = minimal_simulate_config();
  cfg["experiment"] = "banana";
  REQUIRE_THROWS_AS(parse_config(cfg), ConfigError);
}

TEST_CASE("malformed JSON is reported as a config error") {
  fs::path dir = fresh_dir("bad_json");
  fs::path file = dir / "broken.json";
  std::ofstream(file) << "{ not json";
  REQUIRE_THROWS_AS(load_config(file.string()), ConfigError);
  REQUIRE_THROWS_AS(load_config((dir / "missing.json").string()),
                    ConfigError);
}

TEST_CASE("config hash tracks semantic fields only") {
  ExperimentConfig a = parse_config(minimal_simulate_config());
  ExperimentConfig b = a;
  REQUIRE(config_hash(a) == config_hash(b));
  REQUIRE(config_hash(a).size() == 16);

  b.output.directory = "somewhere_else";
  REQUIRE(config_hash(a) == config_hash(b));  // artifact location only

  ExperimentConfig c = a;
  c.seed = 8;
  REQUIRE(config_hash(a) != config_hash(c));

  ExperimentConfig d = a;
  d.time.dt = 5e-4;
  REQUIRE(config_hash(a) != config_hash(d));
}

TEST_CASE("simulation runs are deterministic artifacts") {
  ExperimentConfig cfg = parse_config(minimal_simulate_config());
  RunOptions opts;

  fs::path d1 = fresh_dir("sim_a"), d2 = fresh_dir("sim_b");
  opts.out_dir_override = d1.string();
  RunSummary s1 = run_experiment(cfg, opts);
  opts.out_dir_override = d2.string();
  RunSummary s2 = run_experiment(cfg, opts);

  REQUIRE(s1.exit_code == 0);
  REQUIRE(s1.pass);
  REQUIRE(s1.config_hash_hex == s2.config_hash_hex);
  REQUIRE(read_bytes(d1 / "trajectory.csv") ==
          read_bytes(d2 / "trajectory.csv"));
  REQUIRE(read_bytes(d1 / "energy.dat") == read_bytes(d2 / "energy.dat"));
  REQUIRE(fs::exists(d1 / "summary.json"));
  double res = s1.metrics.at("max_balance_residual").get<double>();
  REQUIRE(res <= 1e-9);
}

TEST_CASE("seed override changes random-data artifacts") {
  json j = minimal_simulate_config();
  j["initial"] = {{"kind", "random_modes"}, {"modes", 4}};
  ExperimentConfig cfg = parse_config(j);

  fs::path d1 = fresh_dir("seed_a"), d2 = fresh_dir("seed_b");
  RunOptions opts;
  opts.out_dir_override = d1.string();
  run_experiment(cfg, opts);

  opts.out_dir_override = d2.string();
  opts.has_seed_override = true;
  opts.seed_override = 999;
  run_experiment(cfg, opts);

  REQUIRE(read_bytes(d1 / "trajectory.csv") !=
          read_bytes(d2 / "trajectory.csv"));
}

TEST_CASE("eigen experiment passes on a fine mesh and fails on a coarse one") {
  json j{{"experiment", "eigen"},
         {"mesh", {{"n_cells", 64}}},
         {"eigen_count", 4}};
  RunOptions opts;
  fs::path d1 = fresh_dir("eigen_fine");
  opts.out_dir_override = d1.string();
  RunSummary fine = run_experiment(parse_config(j), opts);
  REQUIRE(fine.exit_code == 0);
  REQUIRE(fs::exists(d1 / "eigenvalues.csv"));
  REQUIRE(fine.metrics.at("lambda1_rel_error").get<double>() <= 1e-3);

  // Six cells cannot resolve the first eigenvalue to three digits, so the
  // run completes but reports a threshold failure.
  j["mesh"]["n_cells"] = 6;
  j["initial"] = {{"modes", 4}};
  fs::path d2 = fresh_dir("eigen_coarse");
  opts.out_dir_override = d2.string();
  RunSummary coarse = run_experiment(parse_config(j), opts);
  REQUIRE(coarse.exit_code == 2);
  REQUIRE_FALSE(coarse.pass);
}

TEST_CASE("matrix dumps are written when requested") {
  ExperimentConfig cfg = parse_config(minimal_simulate_config());
  RunOptions opts;
  opts.dump_matrices = true;
  fs::path d = fresh_dir("dumps");
  opts.out_dir_override = d.string();
  run_experiment(cfg, opts);
  REQUIRE(fs::exists(d / "stiffness.txt"));
  REQUIRE(fs::exists(d / "robin_laplacian.txt"));
  REQUIRE(fs::exists(d / "generator.txt"));
  REQUIRE(fs::exists(d / "gram.txt"));
}

TEST_CASE("summary file carries the run verdict") {
  ExperimentConfig cfg = parse_config(minimal_simulate_config());
  RunOptions opts;
  fs::path d = fresh_dir("summary");
  opts.out_dir_override = d.string();
  RunSummary s = run_experiment(cfg, opts);
  json j = json::parse(read_bytes(d / "summary.json"));
  REQUIRE(j.at("experiment") == "simulate");
  REQUIRE(j.at("pass") == s.pass);
  REQUIRE(j.at("config_hash") == s.config_hash_hex);
  REQUIRE(j.at("artifacts").is_array());
  REQUIRE(j.at("metrics").contains("max_balance_residual"));
}
