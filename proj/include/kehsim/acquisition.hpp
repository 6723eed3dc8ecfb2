#pragma once

#include "kehsim/circuit.hpp"
#include "kehsim/config.hpp"
#include "kehsim/excitation.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace kehsim {

/// Signal identifiers, named after the rows of the feature-selection table.
namespace signal {
inline constexpr const char* kOcAcV = "OC-AC-V";
inline constexpr const char* kOcRecV = "OC-REC-V";
inline constexpr const char* kClAcV = "CL-AC-V";
inline constexpr const char* kClRecV = "CL-REC-V";
inline constexpr const char* kClC = "CL-C";
inline constexpr const char* kCbC = "CB-C";
inline constexpr const char* kAccX = "ACC-X";
inline constexpr const char* kAccY = "ACC-Y";
inline constexpr const char* kAccZ = "ACC-Z";
/// The combined three-axis accelerometer signal.
inline constexpr const char* kAcc = "ACC";
} // namespace signal

/// Sensing taps wired for a topology (accelerometer excluded).
std::vector<std::string> signals_for(Topology topology);

struct AdcConfig {
  int resolution_bits = 12;
  double full_scale = 3.0;    ///< V
  double sample_rate = 100.0; ///< Hz
  /// Resistive divider in front of the ADC on KEH voltage taps (output/input).
  double divider_ratio = 0.25;
  /// Accelerometer stand-in range, ± m/s² mapped onto the ADC span.
  double accel_range = 4.0 * 9.80665;

  int max_code() const { return (1 << resolution_bits) - 1; }
  double lsb() const { return full_scale / max_code(); }
  void validate(double internal_rate) const;
  static AdcConfig from_config(const KeyValueConfig& cfg);
};

struct ShuntConfig {
  double shunt_resistance = 10.0; ///< Ω
  double amplifier_gain = 100.0;
  double rail = 3.0; ///< V, amplifier output clamps to [0, rail]

  void validate() const;
  static ShuntConfig from_config(const KeyValueConfig& cfg);
};

struct SensingRecord {
  std::string signal_id;
  Eigen::VectorXi codes;
  Eigen::VectorXd engineering_values; ///< V, A, or m/s² for the accelerometer stand-in
  double sample_rate = 100.0;
  Mode mode = Mode::unlabeled;

  Eigen::Index size() const { return codes.size(); }
};

/// Acquisition power constants, µW.
struct PowerModel {
  double keh_amplifier = 1.05;
  double keh_shunt_losses = 0.95;
  double external_adc = 0.7;
  double divider_losses = 0.3;
  double accel_analog = 450.0;
  double accel_digital = 7.2;
  double supply_voltage = 3.0; ///< V

  double keh_current() const { return keh_amplifier + keh_shunt_losses + external_adc; }
  double keh_voltage() const { return external_adc + divider_losses; }
};

/// Shunt voltage after the amplifier: i·R·G clamped to [0, rail].
double shunt_sense(double current, const ShuntConfig& cfg);

/// round(clamp(v, 0, FS)/FS · (2^bits − 1)).
int adc_sample(double volts, const AdcConfig& cfg);
double adc_volts(int code, const AdcConfig& cfg);

/// Decimates the record's taps to the ADC rate (every Nth internal sample, no
/// anti-alias filter). AC voltages are divided and biased to mid-scale, rectified
/// voltages divided, currents routed through the shunt amplifier.
std::vector<SensingRecord> sample_signals(const SimRecord& sim, Mode mode, const AdcConfig& adc,
                                          const ShuntConfig& shunt);

/// Three-axis accelerometer stand-in: X = base acceleration, Y = its 90° phase
/// shifted (Hilbert) copy, Z = half-scale copy delayed by 5 ms. Not sensor data.
std::vector<SensingRecord> sample_accelerometer(const VibrationTrace& trace, const AdcConfig& adc);

/// Power drawn to acquire `signal_id`, µW.
double acquisition_power(const std::string& signal_id, const PowerModel& model = {});

/// time_s,code,value,signal_id,mode
void write_sensing_csv(const std::filesystem::path& path, const SensingRecord& record);
SensingRecord read_sensing_csv(const std::filesystem::path& path);

} // namespace kehsim
