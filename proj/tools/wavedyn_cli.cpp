// Command-line front end: parse a JSON experiment config, run it, write
// artifacts + summary.json, and report headline metrics on stdout.
//
// Exit codes: 0 = run passed its thresholds, 2 = ran but a threshold
// failed, 1 = configuration or runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wavedyn/experiments.hpp"

namespace {

int run_and_report(const wavedyn::ExperimentConfig& cfg,
                   const wavedyn::RunOptions& opts) {
  wavedyn::RunSummary s = wavedyn::run_experiment(cfg, opts);
  std::string out_dir =
      opts.out_dir_override.empty() ? cfg.output.directory
                                    : opts.out_dir_override;
  std::cout << "[wavedyn] experiment=" << s.experiment
            << " config=" << s.config_hash_hex << " out=" << out_dir << "\n";
  std::cout << "[wavedyn] " << (s.pass ? "PASS" : "FAIL") << " ("
            << s.wall_seconds << " s, " << s.artifacts.size()
            << " artifacts)\n";
  std::cout << s.metrics.dump(2) << std::endl;
  return s.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "wavedyn: semilinear damped waves on an interval with dissipative "
      "boundary feedback"};
  app.require_subcommand(1);
  // Let global options (--out, --seed, ...) appear after the subcommand too.
  app.fallthrough();

  wavedyn::RunOptions opts;
  app.add_option("--out", opts.out_dir_override,
                 "Output directory (overrides the config's output.directory)");
  app.add_option("--threads", opts.threads,
                 "Worker threads for independent trajectory runs")
      ->check(CLI::Range(1, 256));
  app.add_flag("--dump-matrices", opts.dump_matrices,
               "Also write the assembled operators as triplet text files");
  auto* seed_opt =
      app.add_option("--seed", opts.seed_override, "Override the RNG seed");

  auto* run_cmd =
      app.add_subcommand("run", "Run the experiment described by a config");
  std::string config_path;
  run_cmd->add_option("config", config_path, "Path to a JSON config file")
      ->required();

  auto* check_cmd = app.add_subcommand(
      "check", "Run the fast deterministic invariant suite");
  std::string check_config;
  check_cmd->add_option("config", check_config,
                        "Optional JSON config (built-in defaults otherwise)");

  CLI11_PARSE(app, argc, argv);
  opts.has_seed_override = seed_opt->count() > 0;

  try {
    wavedyn::ExperimentConfig cfg;
    if (run_cmd->parsed()) {
      cfg = wavedyn::load_config(config_path);
    } else {
      if (!check_config.empty()) cfg = wavedyn::load_config(check_config);
      cfg.experiment = "check";
    }
    return run_and_report(cfg, opts);
  } catch (const wavedyn::ConfigError& e) {
    std::cerr << "[wavedyn] config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "[wavedyn] error: " << e.what() << "\n";
    return 1;
  }
}
