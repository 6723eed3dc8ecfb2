#pragma once

#include "kehsim/config.hpp"
#include "kehsim/excitation.hpp"
#include "kehsim/transducer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace kehsim {

enum class Topology { open_circuit, converterless, converter_based };

std::string_view to_string(Topology topology);
Topology parse_topology(std::string_view name);

struct CircuitParams {
  Topology topology = Topology::converterless;
  double diode_drop = 0.7;            ///< V, per diode
  double diode_on_resistance = 100.0; ///< Ω
  double storage_capacitance = 220e-6; ///< F
  double v_thr_on = 3.38;             ///< V
  double v_thr_off = 2.18;            ///< V
  double load_current = 5e-3;         ///< A
  double converter_input_voltage = 1.0; ///< V, regulated rectifier output
  double converter_efficiency = 0.8;
  /// Storage voltage at t = 0; v_thr_off when unset.
  std::optional<double> initial_v_cap;

  void validate() const;
  double start_voltage() const { return initial_v_cap.value_or(v_thr_off); }
  static CircuitParams from_config(const KeyValueConfig& cfg, Topology topology);
};

/// Intermittent load with on/off hysteresis.
struct LoadState {
  bool is_on = false;
  std::uint64_t on_events = 0;
  double time_on = 0.0; ///< s

  /// Applies the hysteresis rule to the new storage voltage.
  void update(double v_cap, const CircuitParams& params);
};

struct CircuitState {
  double v_cap = 0.0;
  LoadState load;
};

/// One SimRecord row.
struct SimRow {
  double v_ac = 0.0;
  double i_ac = 0.0;
  double v_rect = 0.0;
  double i_rect = 0.0;
  double v_cap = 0.0;
  double i_load = 0.0;
  bool load_on = false;
  double displacement = 0.0;
};

/// Dense record of every tap, one row per internal step. Row k holds the state
/// after base-acceleration sample k has been applied; `load_on` is the
/// hysteresis state after the step, `i_load` the current drawn during it.
struct SimRecord {
  Topology topology = Topology::open_circuit;
  double sample_rate = kInternalRate;
  Eigen::VectorXd time;
  Eigen::VectorXd v_ac;
  Eigen::VectorXd i_ac;
  Eigen::VectorXd v_rect;
  Eigen::VectorXd i_rect;
  Eigen::VectorXd v_cap;
  Eigen::VectorXd i_load;
  std::vector<std::uint8_t> load_on;
  Eigen::VectorXd displacement;
  LoadState final_load;

  Eigen::Index size() const { return time.size(); }
  double duration() const { return static_cast<double>(size()) / sample_rate; }
  void resize(Eigen::Index n);
  void set_row(Eigen::Index k, const SimRow& row);
};

/// Full-bridge current through the piecewise-resistive diode model:
/// max(0, |v_ac| − (v_out + 2·v_d)) / R_on.
double rectifier_current(double v_ac, double v_out, const CircuitParams& params);

/// Storage-capacitor voltage after one step given the rectified and load currents.
/// Converter-less: dv = (i_rect − i_load)·dt/C. Converter-based: the capacitor
/// receives η·V_reg·i_rect, dv = (η·V_reg·i_rect / max(v_cap, 0.05) − i_load)·dt/C.
double storage_voltage_step(double v_cap, double i_rect, double i_load, const CircuitParams& params,
                            double dt);

/// Co-steps the transducer and the circuit by dt. The electrical node (terminal
/// voltage, rectifier current, and for converter-less designs the capacitor) is
/// solved implicitly, so the rectifier clamp holds exactly at every step.
SimRow step_circuit(CircuitState& circuit, TransducerState& transducer, const CircuitParams& params,
                    const TransducerParams& tparams, double base_accel, double dt);

SimRecord simulate(const VibrationTrace& trace, const TransducerParams& tparams, const CircuitParams& cparams);

/// time_s,v_ac,i_ac,v_rect,i_rect,v_cap,i_load,load_on,displacement
void write_sim_record_csv(const std::filesystem::path& path, const SimRecord& record);

} // namespace kehsim
