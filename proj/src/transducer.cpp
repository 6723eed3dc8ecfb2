#include "kehsim/transducer.hpp"

#include "kehsim/common.hpp"

#include <numbers>

namespace kehsim {

void TransducerParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
      throw ValidationError(std::string("transducer.") + name + " must be finite and > 0");
  };
  positive(mass, "mass");
  positive(stiffness, "stiffness");
  positive(damping, "damping");
  positive(coupling, "coupling");
  positive(piezo_capacitance, "piezo_capacitance");
}

TransducerParams TransducerParams::from_config(const KeyValueConfig& cfg) {
  TransducerParams p;
  p.mass = cfg.get_double("transducer.mass", p.mass);
  p.stiffness = cfg.get_double("transducer.stiffness", p.stiffness);
  if (cfg.has("transducer.damping")) {
    p.damping = cfg.get_double("transducer.damping", p.damping);
  } else {
    const double zeta = cfg.get_double("transducer.damping_ratio", kDefaultDampingRatio);
    p.damping = 2.0 * zeta * std::sqrt(p.stiffness * p.mass);
  }
  p.coupling = cfg.get_double("transducer.coupling", p.coupling);
  p.piezo_capacitance = cfg.get_double("transducer.piezo_capacitance", p.piezo_capacitance);
  p.validate();
  return p;
}

double resonant_frequency(const TransducerParams& params) {
  return std::sqrt(params.stiffness / params.mass) / (2.0 * std::numbers::pi);
}

TransducerState advance_mechanics(const TransducerState& s, const TransducerParams& p, double base_accel,
                                  double dt) {
  if (!std::isfinite(base_accel) || !std::isfinite(dt) || dt <= 0.0 || !std::isfinite(s.displacement) ||
      !std::isfinite(s.velocity) || !std::isfinite(s.terminal_voltage))
    throw RuntimeError("transducer step received non-finite input");
  TransducerState next;
  const double force = -p.stiffness * s.displacement - p.coupling * s.terminal_voltage - p.mass * base_accel;
  next.velocity = (s.velocity + dt * force / p.mass) / (1.0 + dt * p.damping / p.mass);
  next.displacement = s.displacement + dt * next.velocity;
  next.terminal_voltage =
      s.terminal_voltage + p.coupling * (next.displacement - s.displacement) / p.piezo_capacitance;
  return next;
}

TransducerState step_transducer(const TransducerState& state, const TransducerParams& params,
                                double base_accel, double terminal_current, double dt) {
  if (!std::isfinite(terminal_current)) throw RuntimeError("transducer step received non-finite current");
  TransducerState next = advance_mechanics(state, params, base_accel, dt);
  next.terminal_voltage -= terminal_current * dt / params.piezo_capacitance;
  return next;
}

} // namespace kehsim
