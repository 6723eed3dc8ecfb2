#pragma once

#include "kehsim/acquisition.hpp"
#include "kehsim/circuit.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kehsim {

/// Average harvested power in µW: the sum of every positive step in stored
/// energy ½·C·v², divided by the recording duration.
template <typename Derived>
double harvested_power(const Eigen::DenseBase<Derived>& v_cap, double capacitance, double duration_s) {
  if (!(duration_s > 0.0)) throw ValidationError("harvested_power: duration must be > 0");
  if (v_cap.size() == 0) throw ValidationError("harvested_power: empty voltage series");
  const Eigen::ArrayXd energy = 0.5 * capacitance * v_cap.derived().array().template cast<double>().square();
  const Eigen::Index n = energy.size();
  const double gained = n > 1 ? (energy.tail(n - 1) - energy.head(n - 1)).max(0.0).sum() : 0.0;
  return gained / duration_s * 1e6;
}

enum class AprClass { energy_negative, energy_neutral, energy_positive };

std::string_view to_string(AprClass c);

/// P_har / P_acq; throws when P_acq is not positive.
double apr(double harvested_uw, double acquisition_uw);
AprClass classify_apr(double ratio);

struct EnergyRow {
  Mode mode = Mode::unlabeled;
  std::string topology; ///< open_circuit | converterless | converter_based | none (accelerometer)
  std::string signal_id;
  double harvested_power = 0.0;   ///< µW
  double acquisition_power = 0.0; ///< µW
  double apr = 0.0;
  AprClass classification = AprClass::energy_negative;
};

struct EnergyReport {
  std::vector<EnergyRow> rows;
};

/// Storage voltage as a logger would see it (ADC rate) plus what is needed to
/// turn it into power.
struct EnergyRun {
  Mode mode = Mode::unlabeled;
  Topology topology = Topology::open_circuit;
  std::string signal_id;
  Eigen::VectorXd v_cap;
  double capacitance = 220e-6;
  double duration_s = 0.0;
};

/// Decimates v_cap to `logger_rate` (every Nth internal sample).
Eigen::VectorXd logged_storage_voltage(const SimRecord& sim, double logger_rate);

/// One run per tapped signal of the record.
std::vector<EnergyRun> energy_runs(const SimRecord& sim, Mode mode, const CircuitParams& params,
                                   double logger_rate = 100.0);

/// One row per run. Open-circuit runs harvest nothing.
EnergyReport energy_report(const std::vector<EnergyRun>& runs, const PowerModel& power = {});

/// Accelerometer row: consumes power, harvests none.
EnergyRow accelerometer_row(Mode mode, const PowerModel& power = {});

/// Measured harvested power per mode for the two harvesting designs (µW).
struct ReferencePower {
  Mode mode;
  double converterless;
  double converter_based;
};

const std::vector<ReferencePower>& reference_harvested_power();
std::vector<ReferencePower> load_reference_csv(const std::filesystem::path& path);

/// Rows computed from reference powers: CL-AC-V and CL-C for converter-less,
/// CB-C for converter-based.
EnergyReport reference_report(const std::vector<ReferencePower>& reference, const PowerModel& power = {});

inline const std::vector<std::string> kEnergyColumns = {
    "mode", "topology", "signal_id", "harvested_power_uw", "acquisition_power_uw", "apr", "classification"};

void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report);

} // namespace kehsim
