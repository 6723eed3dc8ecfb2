// Harvested power from the 100 Hz logged storage voltage versus the full
// 10 kHz series, per mode and design, averaged over the configured trials.
//
//   kehsim_decimation [--config FILE]

#include "kehsim/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity of harvested power to logger decimation"};
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");
  CLI11_PARSE(app, argc, argv);

  try {
    using namespace kehsim;
    KeyValueConfig cfg;
    std::filesystem::path base;
    if (!config_path.empty()) {
      cfg = KeyValueConfig::load(config_path);
      base = std::filesystem::path(config_path).parent_path();
    }
    const auto config = RunConfig::from_config(cfg, base);

    std::map<std::pair<Mode, Topology>, std::pair<double, double>> sums;
    std::map<Mode, int> trials;
    for (const auto& src : config.traces()) {
      const VibrationTrace trace = config.excitation(src);
      ++trials[src.mode];
      for (Topology t : {Topology::converterless, Topology::converter_based}) {
        const CircuitParams p = config.circuit(t);
        const SimRecord sim = simulate(trace, config.transducer, p);
        auto& [logged, full] = sums[{src.mode, t}];
        logged += harvested_power(logged_storage_voltage(sim, config.adc.sample_rate), p.storage_capacitance, sim.duration());
        full += harvested_power(sim.v_cap, p.storage_capacitance, sim.duration());
      }
    }
    std::printf("mode,topology,logged_uw,full_rate_uw,relative_change\n");
    for (const auto& [key, value] : sums) {
      const double n = trials[key.first];
      const double logged = value.first / n, full = value.second / n;
      std::printf("%s,%s,%.4f,%.4f,%.4f\n", std::string(to_string(key.first)).c_str(),
                  std::string(to_string(key.second)).c_str(), logged, full, logged > 0 ? full / logged - 1.0 : 0.0);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
