#pragma once

#include "kehsim/config.hpp"

#include <cmath>

namespace kehsim {

/// Lumped single-degree-of-freedom piezoelectric bender. Defaults put the
/// mechanical resonance at 25 Hz for the 24.62 g tip mass; damping, coupling and
/// capacitance are calibration choices, not measured values.
struct TransducerParams {
  static constexpr double kDefaultDampingRatio = 0.03;

  double mass = 0.02462;      ///< kg
  double stiffness = 607.5;   ///< N/m
  double damping = 2.0 * kDefaultDampingRatio * std::sqrt(607.5 * 0.02462); ///< N·s/m
  double coupling = 1e-3;     ///< N/V
  double piezo_capacitance = 100e-9; ///< F

  void validate() const;
  static TransducerParams from_config(const KeyValueConfig& cfg);
};

struct TransducerState {
  double displacement = 0.0;     ///< m
  double velocity = 0.0;         ///< m/s
  double terminal_voltage = 0.0; ///< V, signed AC voltage before rectification

  double stored_energy(const TransducerParams& p) const {
    return 0.5 * p.mass * velocity * velocity + 0.5 * p.stiffness * displacement * displacement +
           0.5 * p.piezo_capacitance * terminal_voltage * terminal_voltage;
  }
};

double resonant_frequency(const TransducerParams& params);

/// Mechanical half of a step: velocity (damping implicit), then displacement,
/// then the terminal voltage the piezo would reach with no current drawn.
/// The circuit solves the electrical node from this prediction.
TransducerState advance_mechanics(const TransducerState& state, const TransducerParams& params,
                                  double base_accel, double dt);

/// One semi-implicit Euler step of
///   m·ẍ = −c·ẋ − k·x − Θ·v_p − m·a_base,   C_p·v̇_p = Θ·ẋ − i_terminal
/// with a prescribed terminal current.
TransducerState step_transducer(const TransducerState& state, const TransducerParams& params,
                                double base_accel, double terminal_current, double dt);

} // namespace kehsim
