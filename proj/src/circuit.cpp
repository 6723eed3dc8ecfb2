#include "kehsim/circuit.hpp"

#include "kehsim/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace kehsim {

namespace {
constexpr double kColdStartFloor = 0.05; // V
}

std::string_view to_string(Topology topology) {
  switch (topology) {
  case Topology::open_circuit: return "open_circuit";
  case Topology::converterless: return "converterless";
  case Topology::converter_based: return "converter_based";
  }
  return "?";
}

Topology parse_topology(std::string_view name) {
  if (name == "open_circuit") return Topology::open_circuit;
  if (name == "converterless") return Topology::converterless;
  if (name == "converter_based") return Topology::converter_based;
  throw ValidationError("unknown topology '" + std::string(name) +
                        "' (valid: open_circuit|converterless|converter_based)");
}

void CircuitParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(v_thr_on) || !finite(v_thr_off) || !(0.0 < v_thr_off && v_thr_off < v_thr_on))
    throw ValidationError("circuit thresholds require 0 < v_thr_off < v_thr_on");
  if (!finite(diode_drop) || diode_drop < 0.0) throw ValidationError("circuit.diode_drop must be >= 0");
  if (!finite(diode_on_resistance) || diode_on_resistance <= 0.0)
    throw ValidationError("circuit.diode_on_resistance must be > 0");
  if (!finite(storage_capacitance) || storage_capacitance <= 0.0)
    throw ValidationError("circuit.storage_capacitance must be > 0");
  if (!finite(converter_efficiency) || !(converter_efficiency > 0.0 && converter_efficiency <= 1.0))
    throw ValidationError("circuit.converter_efficiency must lie in (0, 1]");
  if (!finite(converter_input_voltage) || converter_input_voltage <= 0.0)
    throw ValidationError("circuit.converter_input_voltage must be > 0");
  if (!finite(load_current) || load_current < 0.0) throw ValidationError("circuit.load_current must be >= 0");
  if (initial_v_cap && (!finite(*initial_v_cap) || *initial_v_cap < 0.0))
    throw ValidationError("circuit.initial_v_cap must be >= 0");
}

CircuitParams CircuitParams::from_config(const KeyValueConfig& cfg, Topology topology) {
  CircuitParams p;
  p.topology = topology;
  p.diode_drop = cfg.get_double("circuit.diode_drop", p.diode_drop);
  p.diode_on_resistance = cfg.get_double("circuit.diode_on_resistance", p.diode_on_resistance);
  p.storage_capacitance = cfg.get_double("circuit.storage_capacitance", p.storage_capacitance);
  p.v_thr_on = cfg.get_double("circuit.v_thr_on", p.v_thr_on);
  p.v_thr_off = cfg.get_double("circuit.v_thr_off", p.v_thr_off);
  p.load_current = cfg.get_double("circuit.load_current", p.load_current);
  p.converter_input_voltage = cfg.get_double("circuit.converter_input_voltage", p.converter_input_voltage);
  p.converter_efficiency = cfg.get_double("circuit.converter_efficiency", p.converter_efficiency);
  if (cfg.has("circuit.initial_v_cap")) p.initial_v_cap = cfg.get_double("circuit.initial_v_cap", 0.0);
  p.validate();
  return p;
}

void LoadState::update(double v_cap, const CircuitParams& params) {
  if (!is_on && v_cap >= params.v_thr_on) {
    is_on = true;
    ++on_events;
  } else if (is_on && v_cap <= params.v_thr_off) {
    is_on = false;
  }
}

void SimRecord::resize(Eigen::Index n) {
  time.resize(n);
  v_ac.resize(n);
  i_ac.resize(n);
  v_rect.resize(n);
  i_rect.resize(n);
  v_cap.resize(n);
  i_load.resize(n);
  load_on.assign(static_cast<std::size_t>(n), 0);
  displacement.resize(n);
}

void SimRecord::set_row(Eigen::Index k, const SimRow& row) {
  v_ac[k] = row.v_ac;
  i_ac[k] = row.i_ac;
  v_rect[k] = row.v_rect;
  i_rect[k] = row.i_rect;
  v_cap[k] = row.v_cap;
  i_load[k] = row.i_load;
  load_on[static_cast<std::size_t>(k)] = row.load_on ? 1 : 0;
  displacement[k] = row.displacement;
}

double rectifier_current(double v_ac, double v_out, const CircuitParams& params) {
  const double excess = std::abs(v_ac) - (v_out + 2.0 * params.diode_drop);
  return excess > 0.0 ? excess / params.diode_on_resistance : 0.0;
}

double storage_voltage_step(double v_cap, double i_rect, double i_load, const CircuitParams& params, double dt) {
  const double b = dt / params.storage_capacitance;
  switch (params.topology) {
  case Topology::converterless:
    return v_cap + (i_rect - i_load) * b;
  case Topology::converter_based: {
    const double i_in = params.converter_efficiency * params.converter_input_voltage * i_rect /
                        std::max(v_cap, kColdStartFloor);
    return v_cap + (i_in - i_load) * b;
  }
  case Topology::open_circuit:
    break;
  }
  return v_cap;
}

SimRow step_circuit(CircuitState& circuit, TransducerState& transducer, const CircuitParams& params,
                    const TransducerParams& tparams, double base_accel, double dt) {
  if (!std::isfinite(circuit.v_cap))
    throw RuntimeError("circuit step: storage voltage is not finite");

  TransducerState next = advance_mechanics(transducer, tparams, base_accel, dt);
  const double predicted = next.terminal_voltage;
  const double magnitude = std::abs(predicted);
  const double sign = predicted < 0.0 ? -1.0 : 1.0;
  const double a = dt / tparams.piezo_capacitance; // Ω-equivalent of C_p over one step
  const double two_vd = 2.0 * params.diode_drop;
  const double i_load = circuit.load.is_on ? params.load_current : 0.0;

  SimRow row;
  row.i_load = (params.topology == Topology::open_circuit) ? 0.0 : i_load;
  double i_rect = 0.0;

  switch (params.topology) {
  case Topology::open_circuit:
    row.v_rect = std::max(0.0, magnitude - two_vd);
    row.v_cap = 0.0;
    break;

  case Topology::converterless: {
    // Solve |v_p| = v_cap' + 2·v_d + i·R_on with v_p and v_cap' both implicit.
    const double b = dt / params.storage_capacitance;
    const double drive = magnitude - circuit.v_cap - two_vd + i_load * b;
    if (drive > 0.0) i_rect = drive / (params.diode_on_resistance + a + b);
    next.terminal_voltage = predicted - sign * i_rect * a;
    circuit.v_cap = storage_voltage_step(circuit.v_cap, i_rect, i_load, params, dt);
    row.v_cap = circuit.v_cap;
    row.v_rect = circuit.v_cap;
    break;
  }

  case Topology::converter_based: {
    const double v_reg = params.converter_input_voltage;
    const double drive = magnitude - v_reg - two_vd;
    if (drive > 0.0) i_rect = drive / (params.diode_on_resistance + a);
    next.terminal_voltage = predicted - sign * i_rect * a;
    circuit.v_cap = storage_voltage_step(circuit.v_cap, i_rect, i_load, params, dt);
    row.v_cap = circuit.v_cap;
    row.v_rect = i_rect > 0.0 ? v_reg : std::min(v_reg, std::max(0.0, std::abs(next.terminal_voltage) - two_vd));
    break;
  }
  }

  if (!std::isfinite(next.terminal_voltage) || !std::isfinite(circuit.v_cap) || !std::isfinite(next.displacement))
    throw RuntimeError("circuit step produced a non-finite state (v_ac=" + std::to_string(next.terminal_voltage) +
                       ", v_cap=" + std::to_string(circuit.v_cap) + ")");

  if (params.topology != Topology::open_circuit) {
    if (circuit.load.is_on) circuit.load.time_on += dt;
    circuit.load.update(circuit.v_cap, params);
  }

  transducer = next;
  row.v_ac = next.terminal_voltage;
  row.i_rect = i_rect;
  row.i_ac = sign * i_rect;
  row.load_on = circuit.load.is_on;
  row.displacement = next.displacement;
  return row;
}

SimRecord simulate(const VibrationTrace& trace, const TransducerParams& tparams, const CircuitParams& cparams) {
  trace.validate();
  tparams.validate();
  cparams.validate();

  const Eigen::Index n = trace.samples.size();
  const double dt = 1.0 / trace.sample_rate;
  SimRecord record;
  record.topology = cparams.topology;
  record.sample_rate = trace.sample_rate;
  record.resize(n);

  CircuitState circuit;
  circuit.v_cap = cparams.topology == Topology::open_circuit ? 0.0 : cparams.start_voltage();
  if (cparams.topology != Topology::open_circuit) circuit.load.update(circuit.v_cap, cparams);
  TransducerState transducer;
  for (Eigen::Index k = 0; k < n; ++k) {
    record.time[k] = static_cast<double>(k) * dt;
    record.set_row(k, step_circuit(circuit, transducer, cparams, tparams, trace.samples[k], dt));
  }
  record.final_load = circuit.load;
  return record;
}

void write_sim_record_csv(const std::filesystem::path& path, const SimRecord& r) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write raw record: " + path.string());
  out.precision(10);
  out << "time_s,v_ac,i_ac,v_rect,i_rect,v_cap,i_load,load_on,displacement\n";
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    out << r.time[k] << ',' << r.v_ac[k] << ',' << r.i_ac[k] << ',' << r.v_rect[k] << ',' << r.i_rect[k] << ','
        << r.v_cap[k] << ',' << r.i_load[k] << ',' << static_cast<int>(r.load_on[static_cast<std::size_t>(k)])
        << ',' << r.displacement[k] << '\n';
  }
}

} // namespace kehsim
