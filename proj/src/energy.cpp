#include "kehsim/energy.hpp"

#include "kehsim/csv.hpp"

#include <cmath>

namespace kehsim {

std::string_view to_string(AprClass c) {
  switch (c) {
  case AprClass::energy_negative: return "energy_negative";
  case AprClass::energy_neutral: return "energy_neutral";
  case AprClass::energy_positive: return "energy_positive";
  }
  return "?";
}

double apr(double harvested_uw, double acquisition_uw) {
  if (!(acquisition_uw > 0.0)) throw ValidationError("apr: acquisition power must be > 0");
  return harvested_uw / acquisition_uw;
}

AprClass classify_apr(double ratio) {
  if (ratio < 1.0) return AprClass::energy_negative;
  if (ratio > 1.0) return AprClass::energy_positive;
  return AprClass::energy_neutral;
}

Eigen::VectorXd logged_storage_voltage(const SimRecord& sim, double logger_rate) {
  const auto factor = static_cast<Eigen::Index>(std::llround(sim.sample_rate / logger_rate));
  if (factor < 1) throw ValidationError("logger rate exceeds the simulation rate");
  const Eigen::Index count = sim.size() / factor;
  Eigen::VectorXd out(count);
  for (Eigen::Index k = 0; k < count; ++k) out[k] = sim.v_cap[k * factor];
  return out;
}

std::vector<EnergyRun> energy_runs(const SimRecord& sim, Mode mode, const CircuitParams& params, double logger_rate) {
  std::vector<EnergyRun> runs;
  const Eigen::VectorXd v = logged_storage_voltage(sim, logger_rate);
  for (const auto& id : signals_for(sim.topology)) {
    EnergyRun run;
    run.mode = mode;
    run.topology = sim.topology;
    run.signal_id = id;
    run.v_cap = v;
    run.capacitance = params.storage_capacitance;
    run.duration_s = sim.duration();
    runs.push_back(std::move(run));
  }
  return runs;
}

EnergyReport energy_report(const std::vector<EnergyRun>& runs, const PowerModel& power) {
  EnergyReport report;
  for (const auto& run : runs) {
    EnergyRow row;
    row.mode = run.mode;
    row.topology = std::string(to_string(run.topology));
    row.signal_id = run.signal_id;
    row.harvested_power =
        run.topology == Topology::open_circuit ? 0.0 : harvested_power(run.v_cap, run.capacitance, run.duration_s);
    row.acquisition_power = acquisition_power(run.signal_id, power);
    row.apr = apr(row.harvested_power, row.acquisition_power);
    row.classification = classify_apr(row.apr);
    report.rows.push_back(std::move(row));
  }
  return report;
}

EnergyRow accelerometer_row(Mode mode, const PowerModel& power) {
  EnergyRow row;
  row.mode = mode;
  row.topology = "none";
  row.signal_id = signal::kAcc;
  row.acquisition_power = acquisition_power(signal::kAcc, power);
  row.apr = apr(0.0, row.acquisition_power);
  row.classification = classify_apr(row.apr);
  return row;
}

const std::vector<ReferencePower>& reference_harvested_power() {
  // Field measurements of average harvested power, µW.
  static const std::vector<ReferencePower> table = {
      {Mode::ferry, 0.1, 0.2},    {Mode::train, 0.06, 0.1},    {Mode::bus, 3.2, 20.4},
      {Mode::car, 4.0, 27.8},     {Mode::tricycle, 5.3, 20.4}, {Mode::pedestrian, 3.7, 10.5},
  };
  return table;
}

std::vector<ReferencePower> load_reference_csv(const std::filesystem::path& path) {
  validate_csv(path, {"mode", "converterless_uw", "converter_based_uw"});
  std::vector<ReferencePower> out;
  for (const auto& row : read_csv(path).rows) {
    const auto cl = parse_double(row[1]), cb = parse_double(row[2]);
    if (!cl || !cb) throw ValidationError(path.string() + ": non-numeric power for mode " + row[0]);
    out.push_back({parse_mode(row[0]), *cl, *cb});
  }
  return out;
}

EnergyReport reference_report(const std::vector<ReferencePower>& reference, const PowerModel& power) {
  EnergyReport report;
  auto add = [&](Mode mode, Topology topology, const char* id, double harvested) {
    EnergyRow row;
    row.mode = mode;
    row.topology = std::string(to_string(topology));
    row.signal_id = id;
    row.harvested_power = harvested;
    row.acquisition_power = acquisition_power(id, power);
    row.apr = apr(harvested, row.acquisition_power);
    row.classification = classify_apr(row.apr);
    report.rows.push_back(row);
  };
  for (const auto& ref : reference) {
    add(ref.mode, Topology::converterless, signal::kClAcV, ref.converterless);
    add(ref.mode, Topology::converterless, signal::kClC, ref.converterless);
    add(ref.mode, Topology::converter_based, signal::kCbC, ref.converter_based);
  }
  return report;
}

void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report) {
  CsvWriter w(path, kEnergyColumns);
  for (const auto& row : report.rows) {
    w.cell(std::string(to_string(row.mode)))
        .cell(row.topology)
        .cell(row.signal_id)
        .cell(row.harvested_power)
        .cell(row.acquisition_power)
        .cell(row.apr)
        .cell(std::string(to_string(row.classification)));
    w.end_row();
  }
}

} // namespace kehsim
