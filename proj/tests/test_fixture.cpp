#include <doctest.h>

#include "kehsim/csv.hpp"
#include "kehsim/run.hpp"

#include <map>

using namespace kehsim;
namespace fs = std::filesystem;

// The shipped synthetic fixture: 6 modes × 4 trials × 60 s, CB-C, 1 s windows.
TEST_CASE("forest holds up against a single tree on the synthetic fixture") {
  const fs::path out = fs::temp_directory_path() / "kehsim_fixture";
  fs::remove_all(out);

  KeyValueConfig cfg;
  cfg.set("run.topologies", "converter_based");
  cfg.set("run.windows_s", "1");
  cfg.set("run.classifiers", "random_forest, decision_tree");
  cfg.set("run.accelerometer", "false");
  const auto config = RunConfig::from_config(cfg);
  REQUIRE(config.trials == 4);
  REQUIRE(config.duration_s == 60.0);
  REQUIRE(config.modes.size() == 6);

  RunOptions options;
  options.out_dir = out;
  cmd_end2end(config, options);

  std::map<std::string, double> accuracy;
  for (const auto& row : read_csv(out / "metrics.csv").rows)
    if (row[0] == "CB-C") accuracy[row[1]] = std::stod(row[3]);
  REQUIRE(accuracy.count("random_forest"));
  REQUIRE(accuracy.count("decision_tree"));
  MESSAGE("RF " << accuracy["random_forest"] << ", DT " << accuracy["decision_tree"]);
  CHECK(accuracy["random_forest"] >= 0.90);
  CHECK(accuracy["random_forest"] >= accuracy["decision_tree"] - 0.02);
  fs::remove_all(out);
}
