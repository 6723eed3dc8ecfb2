// kehsim: batch driver for the harvesting simulator and the mode-detection pipeline.
//
//   kehsim simulate      --config FILE --out DIR [--seed N] [--dump-raw]
//   kehsim evaluate      --config FILE --out DIR [--seed N]
//   kehsim energy-report --config FILE --out DIR
//   kehsim end2end       --config FILE --out DIR [--seed N] [--dump-raw]
//
// Exit codes: 0 ok, 1 invalid input, 2 runtime failure.

#include "kehsim/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Kinetic-energy-harvesting sensor simulator and transport-mode detection pipeline"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool dump_raw = false;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub, bool raw) {
    sub->add_option("--config", config_path, "key = value configuration file (defaults built in)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "global seed (overrides run.seed)");
    if (raw) sub->add_flag("--dump-raw", dump_raw, "also write the full-rate simulation records");
    sub->add_flag("-q,--quiet", quiet, "no progress messages");
  };
  auto* simulate = app.add_subcommand("simulate", "simulate every (trace, topology) and write sensed signals");
  auto* evaluate = app.add_subcommand("evaluate", "features, selection, classifiers and reports from simulated signals");
  auto* energy = app.add_subcommand("energy-report", "harvested power and APR from simulated storage logs");
  auto* end2end = app.add_subcommand("end2end", "simulate then evaluate");
  add_common(simulate, true);
  add_common(evaluate, false);
  add_common(energy, false);
  add_common(end2end, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    kehsim::KeyValueConfig cfg;
    std::filesystem::path base;
    if (!config_path.empty()) {
      cfg = kehsim::KeyValueConfig::load(config_path);
      base = std::filesystem::path(config_path).parent_path();
    }
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    const auto config = kehsim::RunConfig::from_config(cfg, base);

    kehsim::RunOptions options;
    options.out_dir = out_dir;
    options.dump_raw = dump_raw;
    options.log = quiet ? nullptr : &std::cerr;

    if (simulate->parsed()) kehsim::cmd_simulate(config, options);
    else if (evaluate->parsed()) kehsim::cmd_evaluate(config, options);
    else if (energy->parsed()) kehsim::cmd_energy_report(config, options);
    else kehsim::cmd_end2end(config, options);
  } catch (const kehsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
