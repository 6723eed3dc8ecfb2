#pragma once

#include "kehsim/acquisition.hpp"
#include "kehsim/circuit.hpp"
#include "kehsim/classify.hpp"
#include "kehsim/config.hpp"
#include "kehsim/energy.hpp"
#include "kehsim/excitation.hpp"
#include "kehsim/transducer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kehsim {

/// One excitation run: a synthetic trace (seeded) or an external CSV trace.
struct TraceSource {
  Mode mode = Mode::unlabeled;
  int trial = 0;
  std::optional<std::filesystem::path> csv_path;

  /// "<mode>_t<NN>", the prefix of every file produced for this trace.
  std::string stem() const;
};

/// Everything a batch run needs. Built from `run.*` keys plus the module keys
/// (`profile.*`, `transducer.*`, `circuit.*`, `adc.*`, `shunt.*`).
struct RunConfig {
  std::vector<Mode> modes;       ///< synthetic modes (run.modes)
  int trials = 4;                ///< synthetic trials per mode (run.trials)
  double duration_s = 60.0;      ///< synthetic trace length (run.duration_s)
  std::vector<std::pair<std::filesystem::path, Mode>> csv_traces; ///< run.csv_traces = path:mode, ...
  double csv_trace_rate = kInternalRate;
  std::vector<Topology> topologies;
  std::vector<double> windows_s;
  std::vector<Algorithm> classifiers;
  bool accelerometer = true;     ///< also emit and evaluate the ACC stand-in
  bool feature_selection = true; ///< run RFE before the classifiers
  int folds = 10;
  int rfe_trees = 25;
  int forest_trees = 100;
  double stop_threshold = 0.1;
  std::uint64_t seed = 42;
  std::filesystem::path reference_csv; ///< empty = built-in reference powers
  std::filesystem::path base_dir;      ///< resolves relative paths in the config

  std::map<Mode, ModeProfile> profiles;
  TransducerParams transducer;
  KeyValueConfig source; ///< for per-topology circuit params
  AdcConfig adc;
  ShuntConfig shunt;
  PowerModel power;

  static RunConfig defaults();
  static RunConfig from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir = {});
  void validate() const;

  std::vector<TraceSource> traces() const;
  /// The base-acceleration trace for one source (generated or loaded).
  VibrationTrace excitation(const TraceSource& source) const;
  /// Signals evaluated for the configured topologies (ACC last when enabled).
  std::vector<std::string> signal_ids() const;
  CircuitParams circuit(Topology topology) const;
  ClassifierSpec classifier(Algorithm algorithm, std::uint64_t seed) const;
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool dump_raw = false;
  std::ostream* log = nullptr; ///< progress messages; silent when null
};

/// File layout under the output directory.
namespace layout {
std::filesystem::path signal_file(const std::filesystem::path& out, const TraceSource& t, const std::string& id);
std::filesystem::path storage_file(const std::filesystem::path& out, const TraceSource& t, Topology topology);
std::filesystem::path raw_file(const std::filesystem::path& out, const TraceSource& t, Topology topology);
std::filesystem::path features_file(const std::filesystem::path& out, const std::string& id, double window_s);
} // namespace layout

/// Documented headers of every emitted CSV, by file name.
const std::map<std::string, std::vector<std::string>>& report_schemas();

/// excitation → transducer → circuit → acquisition for every (trace, topology);
/// writes per-signal sensing CSVs and 100 Hz storage-voltage logs.
void cmd_simulate(const RunConfig& config, const RunOptions& options);

/// Reads the storage logs and writes energy_report.csv and energy_reference.csv.
EnergyReport cmd_energy_report(const RunConfig& config, const RunOptions& options);

/// Reads the sensing CSVs, runs stop removal → windows → features → RFE →
/// cross-validated classifiers per (signal, window), and writes the metric,
/// confusion, feature-selection and APR-vs-accuracy tables plus the energy report.
void cmd_evaluate(const RunConfig& config, const RunOptions& options);

/// simulate then evaluate.
void cmd_end2end(const RunConfig& config, const RunOptions& options);

} // namespace kehsim
