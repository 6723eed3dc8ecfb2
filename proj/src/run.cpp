#include "kehsim/run.hpp"

#include "kehsim/csv.hpp"
#include "kehsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace kehsim {

namespace fs = std::filesystem;

namespace {

std::mutex log_mutex;

void log(const RunOptions& options, const std::string& message) {
  if (!options.log) return;
  std::lock_guard lock(log_mutex);
  *options.log << message << '\n' << std::flush;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must go to
/// per-index slots; the first exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<long long>(jobs, 1, static_cast<long long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int worker_count(const KeyValueConfig& cfg) {
  const auto hw = static_cast<long long>(std::max(1u, std::thread::hardware_concurrency()));
  const long long jobs = cfg.get_int("run.jobs", 0);
  if (jobs < 0) throw ValidationError("run.jobs must be >= 0 (0 = one per hardware thread)");
  return static_cast<int>(jobs == 0 ? hw : jobs);
}

std::string window_tag(double window_s) { return format_double(window_s); }

void require_files(const std::vector<fs::path>& expected, const std::string& what) {
  std::vector<fs::path> missing;
  for (const auto& p : expected)
    if (!fs::exists(p)) missing.push_back(p);
  if (missing.empty()) return;
  std::string msg = "missing " + what + " (" + std::to_string(missing.size()) + " of " +
                    std::to_string(expected.size()) + "); run `simulate` first. Expected files:";
  for (const auto& p : missing) msg += "\n  " + p.string();
  throw ValidationError(msg);
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() || base.empty() ? p : base / p; }

const std::vector<std::string> kStorageColumns = {"time_s", "v_cap", "load_on"};

} // namespace

std::string TraceSource::stem() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_t%02d", trial);
  return std::string(to_string(mode)) + buf;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.modes.assign(kClassModes.begin(), kClassModes.end());
  c.topologies = {Topology::open_circuit, Topology::converterless, Topology::converter_based};
  for (int w = 1; w <= 10; ++w) c.windows_s.push_back(w);
  c.classifiers.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
  for (Mode m : kClassModes) c.profiles[m] = default_profile(m);
  return c;
}

RunConfig RunConfig::from_config(const KeyValueConfig& cfg, const fs::path& base_dir) {
  RunConfig c = defaults();
  c.source = cfg;
  c.base_dir = base_dir;
  if (cfg.has("run.modes")) {
    c.modes.clear();
    for (const auto& m : cfg.get_list("run.modes")) c.modes.push_back(parse_mode(m));
  }
  c.trials = static_cast<int>(cfg.get_int("run.trials", c.trials));
  c.duration_s = cfg.get_double("run.duration_s", c.duration_s);
  for (const auto& item : cfg.get_list("run.csv_traces")) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos)
      throw ValidationError("run.csv_traces entry must be path:mode, got '" + item + "'");
    c.csv_traces.emplace_back(resolve(trim(item.substr(0, colon)), base_dir), parse_mode(trim(item.substr(colon + 1))));
  }
  c.csv_trace_rate = cfg.get_double("run.csv_trace_rate", c.csv_trace_rate);
  if (cfg.has("run.topologies")) {
    c.topologies.clear();
    for (const auto& t : cfg.get_list("run.topologies")) c.topologies.push_back(parse_topology(t));
  }
  if (cfg.has("run.windows_s")) {
    c.windows_s.clear();
    for (const auto& w : cfg.get_list("run.windows_s")) {
      const auto v = parse_double(w);
      if (!v) throw ValidationError("run.windows_s: '" + w + "' is not a number");
      c.windows_s.push_back(*v);
    }
  }
  if (cfg.has("run.classifiers")) {
    c.classifiers.clear();
    for (const auto& a : cfg.get_list("run.classifiers")) c.classifiers.push_back(parse_algorithm(a));
  }
  c.accelerometer = cfg.get_bool("run.accelerometer", c.accelerometer);
  c.feature_selection = cfg.get_bool("run.feature_selection", c.feature_selection);
  c.folds = static_cast<int>(cfg.get_int("run.folds", c.folds));
  c.rfe_trees = static_cast<int>(cfg.get_int("run.rfe_trees", c.rfe_trees));
  c.forest_trees = static_cast<int>(cfg.get_int("run.forest_trees", c.forest_trees));
  c.stop_threshold = cfg.get_double("run.stop_threshold", c.stop_threshold);
  const long long seed = cfg.get_int("run.seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ValidationError("run.seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  if (cfg.has("run.reference_csv")) c.reference_csv = resolve(cfg.get_string("run.reference_csv", ""), base_dir);

  for (Mode m : kClassModes) c.profiles[m] = profile_from_config(cfg, m);
  c.transducer = TransducerParams::from_config(cfg);
  c.adc = AdcConfig::from_config(cfg);
  c.shunt = ShuntConfig::from_config(cfg);
  c.power.keh_amplifier = cfg.get_double("power.keh_amplifier", c.power.keh_amplifier);
  c.power.keh_shunt_losses = cfg.get_double("power.keh_shunt_losses", c.power.keh_shunt_losses);
  c.power.external_adc = cfg.get_double("power.external_adc", c.power.external_adc);
  c.power.divider_losses = cfg.get_double("power.divider_losses", c.power.divider_losses);
  c.power.accel_analog = cfg.get_double("power.accel_analog", c.power.accel_analog);
  c.power.accel_digital = cfg.get_double("power.accel_digital", c.power.accel_digital);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (modes.empty() && csv_traces.empty())
    throw ValidationError("run.modes / run.csv_traces: at least one trace is required");
  if (!modes.empty() && trials < 1) throw ValidationError("run.trials must be >= 1");
  if (!(duration_s > 0.0)) throw ValidationError("run.duration_s must be > 0");
  if (!(csv_trace_rate > 0.0)) throw ValidationError("run.csv_trace_rate must be > 0");
  if (topologies.empty()) throw ValidationError("run.topologies: at least one topology is required");
  if (std::set<Topology>(topologies.begin(), topologies.end()).size() != topologies.size())
    throw ValidationError("run.topologies: duplicate topology");
  if (windows_s.empty()) throw ValidationError("run.windows_s: at least one window size is required");
  for (double w : windows_s)
    if (!(w >= 1.0 && w <= 10.0))
      throw ValidationError("run.windows_s: window " + format_double(w) + " s outside [1, 10] s");
  if (classifiers.empty()) throw ValidationError("run.classifiers: at least one classifier is required");
  if (folds < 2) throw ValidationError("run.folds must be >= 2");
  if (rfe_trees < 1 || forest_trees < 1) throw ValidationError("run.rfe_trees and run.forest_trees must be >= 1");
  if (!(stop_threshold >= 0.0 && stop_threshold < 1.0)) throw ValidationError("run.stop_threshold must lie in [0, 1)");
  for (const auto& [mode, profile] : profiles) profile.validate();
  transducer.validate();
  adc.validate(kInternalRate);
  shunt.validate();
  for (Topology t : topologies) circuit(t);
}

std::vector<TraceSource> RunConfig::traces() const {
  std::vector<TraceSource> out;
  std::map<Mode, int> next_trial;
  for (Mode m : modes)
    for (int t = 1; t <= trials; ++t) {
      out.push_back({m, t, std::nullopt});
      next_trial[m] = t;
    }
  for (const auto& [path, mode] : csv_traces) out.push_back({mode, ++next_trial[mode], path});
  return out;
}

std::vector<std::string> RunConfig::signal_ids() const {
  std::vector<std::string> ids;
  for (Topology t : topologies)
    for (auto& id : signals_for(t)) ids.push_back(id);
  if (accelerometer) ids.push_back(signal::kAcc);
  return ids;
}

VibrationTrace RunConfig::excitation(const TraceSource& src) const {
  if (src.csv_path) {
    VibrationTrace trace = load_trace_csv(*src.csv_path, csv_trace_rate, src.mode);
    if (trace.sample_rate != kInternalRate)
      throw ValidationError(src.csv_path->string() + ": trace rate must equal the internal rate (" +
                            format_double(kInternalRate) + " Hz)");
    return trace;
  }
  const auto trace_seed = derive_seed(seed, "trace", static_cast<std::uint64_t>(class_index(src.mode)) * 1000 +
                                                        static_cast<std::uint64_t>(src.trial));
  return gen_mode_trace(src.mode, duration_s, trace_seed, profiles.at(src.mode));
}

CircuitParams RunConfig::circuit(Topology topology) const { return CircuitParams::from_config(source, topology); }

ClassifierSpec RunConfig::classifier(Algorithm algorithm, std::uint64_t model_seed) const {
  ClassifierSpec spec{algorithm, {}, model_seed};
  if (algorithm == Algorithm::random_forest) spec.hyperparams["trees"] = forest_trees;
  const std::string prefix = "classifier." + std::string(to_string(algorithm)) + ".";
  for (const auto& [key, value] : source.entries())
    if (key.rfind(prefix, 0) == 0) spec.hyperparams[key.substr(prefix.size())] = source.get_double(key, 0.0);
  spec.validate();
  return spec;
}

namespace layout {
fs::path signal_file(const fs::path& out, const TraceSource& t, const std::string& id) {
  return out / "signals" / (t.stem() + "_" + id + ".csv");
}
fs::path storage_file(const fs::path& out, const TraceSource& t, Topology topology) {
  return out / "storage" / (t.stem() + "_" + std::string(to_string(topology)) + ".csv");
}
fs::path raw_file(const fs::path& out, const TraceSource& t, Topology topology) {
  return out / "raw" / (t.stem() + "_" + std::string(to_string(topology)) + ".csv");
}
fs::path features_file(const fs::path& out, const std::string& id, double window_s) {
  return out / "features" / (id + "_w" + window_tag(window_s) + ".csv");
}
} // namespace layout

const std::map<std::string, std::vector<std::string>>& report_schemas() {
  static const std::map<std::string, std::vector<std::string>> schemas = [] {
    std::vector<std::string> confusion = {"signal_id", "classifier", "window_s", "truth"};
    for (Mode m : kClassModes) confusion.emplace_back(to_string(m));
    return std::map<std::string, std::vector<std::string>>{
        {"metrics.csv", {"signal_id", "classifier", "window_s", "accuracy", "ci95"}},
        {"accuracy_vs_window.csv", {"classifier", "signal_id", "window_s", "accuracy", "ci95"}},
        {"confusion.csv", confusion},
        {"rfe.csv", {"signal_id", "window_s", "n_features", "cv_accuracy", "selected"}},
        {"selected_features.csv", {"signal_id", "window_s", "feature"}},
        {"apr_vs_accuracy.csv", {"signal_id", "mode", "classifier", "window_s", "apr", "accuracy"}},
        {"energy_report.csv", kEnergyColumns},
        {"energy_reference.csv", kEnergyColumns},
    };
  }();
  return schemas;
}

void cmd_simulate(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path& out = options.out_dir;
  fs::create_directories(out / "signals");
  fs::create_directories(out / "storage");
  if (options.dump_raw) fs::create_directories(out / "raw");

  const auto traces = config.traces();
  const auto factor = static_cast<Eigen::Index>(std::llround(kInternalRate / config.adc.sample_rate));
  parallel_for(traces.size(), worker_count(config.source), [&](std::size_t i) {
    const TraceSource& src = traces[i];
    const VibrationTrace trace = config.excitation(src);
    log(options, "simulate " + src.stem());

    if (config.accelerometer)
      for (const auto& rec : sample_accelerometer(trace, config.adc))
        write_sensing_csv(layout::signal_file(out, src, rec.signal_id), rec);

    for (Topology topology : config.topologies) {
      const SimRecord sim = simulate(trace, config.transducer, config.circuit(topology));
      for (const auto& rec : sample_signals(sim, src.mode, config.adc, config.shunt))
        write_sensing_csv(layout::signal_file(out, src, rec.signal_id), rec);
      {
        CsvWriter w(layout::storage_file(out, src, topology), kStorageColumns);
        for (Eigen::Index k = 0; k * factor < sim.size(); ++k) {
          w.cell(static_cast<double>(k) / config.adc.sample_rate)
              .cell(sim.v_cap[k * factor])
              .cell(static_cast<int>(sim.load_on[static_cast<std::size_t>(k * factor)]));
          w.end_row();
        }
      }
      if (options.dump_raw) write_sim_record_csv(layout::raw_file(out, src, topology), sim);
    }
  });

  const std::vector<std::string> sensing = {"time_s", "code", "value", "signal_id", "mode"};
  for (const auto& src : traces) {
    for (Topology topology : config.topologies) {
      validate_csv(layout::storage_file(out, src, topology), kStorageColumns);
      for (const auto& id : signals_for(topology)) validate_csv(layout::signal_file(out, src, id), sensing);
    }
    if (config.accelerometer)
      for (const char* id : {signal::kAccX, signal::kAccY, signal::kAccZ})
        validate_csv(layout::signal_file(out, src, id), sensing);
  }
}

EnergyReport cmd_energy_report(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path& out = options.out_dir;
  const auto traces = config.traces();
  std::vector<fs::path> expected;
  for (const auto& src : traces)
    for (Topology topology : config.topologies) expected.push_back(layout::storage_file(out, src, topology));
  require_files(expected, "storage logs");

  // Mean harvested power over the trials of each (mode, topology).
  std::vector<Mode> mode_order;
  std::map<std::pair<Mode, Topology>, std::pair<double, int>> harvested;
  for (const auto& src : traces) {
    if (std::find(mode_order.begin(), mode_order.end(), src.mode) == mode_order.end()) mode_order.push_back(src.mode);
    for (Topology topology : config.topologies) {
      const fs::path path = layout::storage_file(out, src, topology);
      validate_csv(path, kStorageColumns);
      const CsvTable table = read_csv(path);
      if (table.rows.empty()) throw ValidationError(path.string() + ": no samples");
      Eigen::VectorXd v(static_cast<Eigen::Index>(table.rows.size()));
      for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto value = parse_double(table.rows[k][1]);
        if (!value) throw ValidationError(path.string() + ": malformed v_cap at row " + std::to_string(k + 2));
        v[static_cast<Eigen::Index>(k)] = *value;
      }
      const double duration = static_cast<double>(v.size()) / config.adc.sample_rate;
      const double p = topology == Topology::open_circuit
                           ? 0.0
                           : harvested_power(v, config.circuit(topology).storage_capacitance, duration);
      auto& acc = harvested[{src.mode, topology}];
      acc.first += p;
      acc.second += 1;
    }
  }

  EnergyReport report;
  for (Mode mode : mode_order) {
    for (Topology topology : config.topologies) {
      const auto& [sum, count] = harvested.at({mode, topology});
      for (const auto& id : signals_for(topology)) {
        EnergyRow row;
        row.mode = mode;
        row.topology = std::string(to_string(topology));
        row.signal_id = id;
        row.harvested_power = sum / count;
        row.acquisition_power = acquisition_power(id, config.power);
        row.apr = apr(row.harvested_power, row.acquisition_power);
        row.classification = classify_apr(row.apr);
        report.rows.push_back(row);
      }
    }
    if (config.accelerometer) report.rows.push_back(accelerometer_row(mode, config.power));
  }

  fs::create_directories(out);
  write_energy_csv(out / "energy_report.csv", report);
  const auto reference =
      config.reference_csv.empty() ? reference_harvested_power() : load_reference_csv(config.reference_csv);
  write_energy_csv(out / "energy_reference.csv", reference_report(reference, config.power));
  validate_csv(out / "energy_report.csv", kEnergyColumns);
  validate_csv(out / "energy_reference.csv", kEnergyColumns);
  log(options, "energy report: " + std::to_string(report.rows.size()) + " rows");
  return report;
}

namespace {

struct EvalJob {
  std::string signal_id;
  std::size_t signal_index = 0;
  double window_s = 1.0;
  std::size_t window_index = 0;
};

struct EvalResult {
  std::vector<std::string> names;
  std::optional<RfeResult> rfe;
  std::vector<CvResult> cv; ///< one per configured classifier
};

SignalTrace load_signal(const fs::path& out, const TraceSource& src, const std::string& id) {
  if (id == signal::kAcc)
    return combine_axes(read_sensing_csv(layout::signal_file(out, src, signal::kAccX)),
                        read_sensing_csv(layout::signal_file(out, src, signal::kAccY)),
                        read_sensing_csv(layout::signal_file(out, src, signal::kAccZ)));
  return to_signal_trace(read_sensing_csv(layout::signal_file(out, src, id)));
}

void write_feature_matrix(const fs::path& path, const Dataset& data) {
  std::vector<std::string> header = data.names;
  header.emplace_back("label");
  CsvWriter w(path, header);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) w.cell(data.features(r, c));
    w.cell(std::string(to_string(class_mode(data.labels[static_cast<std::size_t>(r)]))));
    w.end_row();
  }
}

} // namespace

void cmd_evaluate(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path& out = options.out_dir;
  std::vector<TraceSource> traces;
  for (const auto& t : config.traces())
    if (t.mode != Mode::unlabeled) traces.push_back(t);
  if (traces.empty()) throw ValidationError("evaluate: no labeled traces configured");

  const auto ids = config.signal_ids();
  std::vector<fs::path> expected;
  for (const auto& src : traces) {
    for (Topology topology : config.topologies)
      for (const auto& id : signals_for(topology)) expected.push_back(layout::signal_file(out, src, id));
    if (config.accelerometer)
      for (const char* id : {signal::kAccX, signal::kAccY, signal::kAccZ})
        expected.push_back(layout::signal_file(out, src, id));
  }
  require_files(expected, "signal files");

  // Stop removal once per (signal, trace). A record left with less than two of the
  // longest windows (e.g. a rectifier current that hardly ever conducts) is kept
  // whole: the absence of signal is itself what the node would observe.
  const double longest = *std::max_element(config.windows_s.begin(), config.windows_s.end());
  std::vector<std::vector<SignalTrace>> moving(ids.size());
  for (std::size_t s = 0; s < ids.size(); ++s) {
    for (const auto& src : traces) {
      SignalTrace trace = load_signal(out, src, ids[s]);
      std::optional<SignalTrace> kept;
      try {
        kept = remove_stops(trace, config.stop_threshold);
      } catch (const RuntimeError&) {
      }
      const double kept_s = kept ? static_cast<double>(kept->size()) / kept->sample_rate : 0.0;
      if (kept && kept_s >= 2.0 * longest) {
        moving[s].push_back(std::move(*kept));
      } else {
        log(options, "note: " + ids[s] + " " + src.stem() + " keeps " + format_double(kept_s) +
                         " s after stop removal; used unfiltered");
        moving[s].push_back(std::move(trace));
      }
    }
  }

  std::vector<EvalJob> jobs;
  for (std::size_t s = 0; s < ids.size(); ++s)
    for (std::size_t w = 0; w < config.windows_s.size(); ++w) jobs.push_back({ids[s], s, config.windows_s[w], w});

  fs::create_directories(out / "features");
  std::vector<EvalResult> results(jobs.size());
  parallel_for(jobs.size(), worker_count(config.source), [&](std::size_t j) {
    const EvalJob& job = jobs[j];
    const std::uint64_t job_index = job.signal_index * 100 + job.window_index;
    std::vector<FeatureVector> vectors;
    for (const auto& trace : moving[job.signal_index])
      for (const auto& window : make_windows(trace, job.window_s)) vectors.push_back(extract_features(window));
    const Dataset data = build_dataset(vectors);
    const auto constant = std::count_if(vectors.begin(), vectors.end(), [](const FeatureVector& v) { return v.degenerate; });
    write_feature_matrix(layout::features_file(out, job.signal_id, job.window_s), data);

    EvalResult& result = results[j];
    result.names = data.names;
    Dataset selected = data;
    if (config.feature_selection) {
      RfeOptions ro;
      ro.folds = config.folds;
      ro.seed = derive_seed(config.seed, "rfe", job_index);
      ro.trees = config.rfe_trees;
      result.rfe = rfe(data, ro);
      selected = data.select_columns(result.rfe->selected);
    }
    CvOptions cv;
    cv.folds = config.folds;
    cv.seed = derive_seed(config.seed, "cv", job_index);
    for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
      const ClassifierSpec spec =
          config.classifier(config.classifiers[c], derive_seed(config.seed, "model", job_index * 10 + c));
      result.cv.push_back(cross_validate(selected, spec, cv));
    }
    log(options, "evaluate " + job.signal_id + " window " + window_tag(job.window_s) + " s: " +
                     std::to_string(data.rows()) + " windows" +
                     (constant ? " (" + std::to_string(constant) + " constant)" : std::string()) + ", " +
                     std::to_string(selected.cols()) + " features, " + std::string(to_string(config.classifiers[0])) +
                     " accuracy " + format_double(result.cv.front().mean_accuracy));
  });

  const auto& schema = report_schemas();
  {
    CsvWriter metrics(out / "metrics.csv", schema.at("metrics.csv"));
    CsvWriter confusion(out / "confusion.csv", schema.at("confusion.csv"));
    for (std::size_t j = 0; j < jobs.size(); ++j)
      for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
        const CvResult& r = results[j].cv[c];
        const std::string algo(to_string(config.classifiers[c]));
        metrics.cell(jobs[j].signal_id).cell(algo).cell(jobs[j].window_s).cell(r.mean_accuracy).cell(r.ci95);
        metrics.end_row();
        for (int t = 0; t < kNumClasses; ++t) {
          confusion.cell(jobs[j].signal_id).cell(algo).cell(jobs[j].window_s).cell(std::string(to_string(class_mode(t))));
          for (int p = 0; p < kNumClasses; ++p) confusion.cell(r.confusion.counts(t, p));
          confusion.end_row();
        }
      }
  }

  // Reference classifier for the per-window and per-mode views: the forest when configured.
  const auto ref_it = std::find(config.classifiers.begin(), config.classifiers.end(), Algorithm::random_forest);
  const std::size_t ref = ref_it == config.classifiers.end() ? 0 : static_cast<std::size_t>(ref_it - config.classifiers.begin());
  const std::string ref_name(to_string(config.classifiers[ref]));
  {
    CsvWriter w(out / "accuracy_vs_window.csv", schema.at("accuracy_vs_window.csv"));
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      w.cell(ref_name).cell(jobs[j].signal_id).cell(jobs[j].window_s).cell(results[j].cv[ref].mean_accuracy).cell(
          results[j].cv[ref].ci95);
      w.end_row();
    }
  }
  {
    CsvWriter rfe_csv(out / "rfe.csv", schema.at("rfe.csv"));
    CsvWriter chosen(out / "selected_features.csv", schema.at("selected_features.csv"));
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const auto& r = results[j].rfe;
      if (!r) continue;
      for (const auto& [size, score] : r->cv_scores) {
        rfe_csv.cell(jobs[j].signal_id).cell(jobs[j].window_s).cell(size).cell(score).cell(
            size == static_cast<int>(r->selected.size()) ? 1 : 0);
        rfe_csv.end_row();
      }
      for (int col : r->selected) {
        chosen.cell(jobs[j].signal_id).cell(jobs[j].window_s).cell(results[j].names[static_cast<std::size_t>(col)]);
        chosen.end_row();
      }
    }
  }

  const EnergyReport energy = cmd_energy_report(config, options);
  {
    CsvWriter w(out / "apr_vs_accuracy.csv", schema.at("apr_vs_accuracy.csv"));
    for (std::size_t s = 0; s < ids.size(); ++s) {
      // The window with the best reference accuracy (smallest on ties).
      std::size_t best = 0;
      bool found = false;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].signal_index != s) continue;
        if (!found || results[j].cv[ref].mean_accuracy > results[best].cv[ref].mean_accuracy) best = j;
        found = true;
      }
      std::set<Mode> seen;
      for (const auto& src : traces) {
        if (!seen.insert(src.mode).second) continue;
        double ratio = 0.0;
        for (const auto& row : energy.rows)
          if (row.mode == src.mode && row.signal_id == ids[s]) ratio = row.apr;
        w.cell(ids[s]).cell(std::string(to_string(src.mode))).cell(ref_name).cell(jobs[best].window_s).cell(ratio).cell(
            results[best].cv[ref].confusion.recall[class_index(src.mode)]);
        w.end_row();
      }
    }
  }

  for (const auto& [name, header] : schema) validate_csv(out / name, header);
  for (const auto& job : jobs) {
    std::vector<std::string> header = results[&job - jobs.data()].names;
    header.emplace_back("label");
    validate_csv(layout::features_file(out, job.signal_id, job.window_s), header);
  }
}

void cmd_end2end(const RunConfig& config, const RunOptions& options) {
  cmd_simulate(config, options);
  cmd_evaluate(config, options);
}

} // namespace kehsim
