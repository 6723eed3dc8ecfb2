#include <doctest.h>

#include "kehsim/circuit.hpp"
#include "kehsim/energy.hpp"
#include "kehsim/excitation.hpp"

#include <cmath>
#include <numbers>

using namespace kehsim;

namespace {

CircuitParams params(Topology t) {
  CircuitParams p;
  p.topology = t;
  return p;
}

VibrationTrace sinusoid(double freq, double amplitude, double seconds) {
  VibrationTrace t;
  t.mode = Mode::unlabeled;
  t.sample_rate = kInternalRate;
  const auto n = static_cast<Eigen::Index>(seconds * kInternalRate);
  t.samples.resize(n);
  for (Eigen::Index k = 0; k < n; ++k)
    t.samples[k] = amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(k) / kInternalRate);
  return t;
}

const SimRecord& car_record(Topology t) {
  static const auto trace = gen_mode_trace(Mode::car, 60.0, 1, default_profile(Mode::car));
  static const SimRecord cl = simulate(trace, {}, params(Topology::converterless));
  static const SimRecord cb = simulate(trace, {}, params(Topology::converter_based));
  return t == Topology::converterless ? cl : cb;
}

} // namespace

TEST_CASE("rectifier current") {
  const auto p = params(Topology::converterless);
  CHECK(rectifier_current(5.0, 3.0, p) == doctest::Approx(6e-3));
  CHECK(rectifier_current(2.9, 3.0, p) == 0.0);
  CHECK(rectifier_current(-5.0, 3.0, p) == rectifier_current(5.0, 3.0, p));
  CHECK(rectifier_current(4.4, 3.0, p) == 0.0);
}

TEST_CASE("converter transfer step") {
  const auto p = params(Topology::converter_based);
  const double dv = storage_voltage_step(2.0, 1e-3, 0.0, p, 1e-4) - 2.0;
  CHECK(dv == doctest::Approx(0.8 * 1.0 * 1e-3 / 2.0 * 1e-4 / 220e-6));
  CHECK(dv * 1e3 == doctest::Approx(0.182).epsilon(0.005));
  // Cold start: the division floors at 50 mV.
  CHECK(storage_voltage_step(0.0, 1e-3, 0.0, p, 1e-4) == doctest::Approx(0.8 * 1e-3 / 0.05 * 1e-4 / 220e-6));
}

TEST_CASE("load hysteresis") {
  const auto p = params(Topology::converterless);
  LoadState load;
  load.update(3.0, p);
  CHECK_FALSE(load.is_on);
  load.update(3.38, p);
  CHECK(load.is_on);
  CHECK(load.on_events == 1);
  load.update(3.0, p);
  CHECK(load.is_on);
  load.update(2.5, p);
  CHECK(load.is_on);
  load.update(2.18, p);
  CHECK_FALSE(load.is_on);
  load.update(3.0, p);
  CHECK_FALSE(load.is_on);
  CHECK(load.on_events == 1);
}

TEST_CASE("converterless storage rises while conducting") {
  const auto p = params(Topology::converterless);
  CircuitState c;
  c.v_cap = 2.0;
  c.load.update(c.v_cap, p);
  TransducerState t;
  t.terminal_voltage = 5.0;
  const auto row = step_circuit(c, t, p, {}, 0.0, 1.0 / kInternalRate);
  CHECK(row.i_rect > 0.0);
  CHECK(c.v_cap > 2.0);
  // Implicit node: the clamp holds exactly after the step.
  CHECK(std::abs(row.v_ac) == doctest::Approx(c.v_cap + 1.4 + row.i_rect * 100.0));
}

TEST_CASE("zero trace in open circuit gives zero channels") {
  const auto rec = simulate(sinusoid(25.0, 0.0, 1.0), {}, params(Topology::open_circuit));
  CHECK(rec.size() == 10000);
  CHECK(rec.v_ac.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rec.v_rect.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rec.i_ac.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rec.i_rect.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rec.i_load.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("open circuit draws no current and floors the rectified voltage") {
  const auto trace = gen_mode_trace(Mode::car, 10.0, 3, default_profile(Mode::car));
  const auto rec = simulate(trace, {}, params(Topology::open_circuit));
  CHECK(rec.i_ac.cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index k = 0; k < rec.size(); ++k)
    REQUIRE(rec.v_rect[k] == doctest::Approx(std::max(0.0, std::abs(rec.v_ac[k]) - 1.4)));
}

TEST_CASE("converterless envelope and threshold distortion") {
  const auto& rec = car_record(Topology::converterless);
  const auto p = params(Topology::converterless);
  double worst = -1e9;
  int conducting = 0;
  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    const double bound = rec.v_cap[k] + 2.0 * p.diode_drop + rec.i_rect[k] * p.diode_on_resistance;
    worst = std::max(worst, std::abs(rec.v_ac[k]) - bound);
    if (std::abs(rec.v_ac[k]) < rec.v_cap[k] + 2.0 * p.diode_drop) REQUIRE(rec.i_rect[k] == 0.0);
    if (rec.i_rect[k] > 0.0) ++conducting;
    REQUIRE(rec.i_rect[k] >= 0.0);
  }
  CHECK(worst <= 1e-3);
  CHECK(conducting > 0);
}

TEST_CASE("storage is monotone while the load is off") {
  const auto& rec = car_record(Topology::converterless);
  for (Eigen::Index k = 1; k < rec.size(); ++k)
    if (rec.i_load[k] == 0.0) REQUIRE(rec.v_cap[k] >= rec.v_cap[k - 1]);
}

TEST_CASE("load events alternate at the thresholds") {
  // Resonant drive strong enough to cycle the load several times in a minute.
  const auto drive = sinusoid(25.0, 2.0, 60.0);
  for (Topology t : {Topology::converterless, Topology::converter_based}) {
    const auto p = params(t);
    const auto rec = simulate(drive, {}, p);
    int ons = 0, offs = 0;
    bool prev = false; // v_thr_off start: load begins off
    for (Eigen::Index k = 0; k < rec.size(); ++k) {
      const bool on = rec.load_on[static_cast<std::size_t>(k)] != 0;
      if (on && !prev) {
        ++ons;
        REQUIRE(rec.v_cap[k] >= p.v_thr_on - 1e-3);
      } else if (!on && prev) {
        ++offs;
        REQUIRE(rec.v_cap[k] <= p.v_thr_off + 1e-3);
      }
      REQUIRE(ons - offs >= 0);
      REQUIRE(ons - offs <= 1);
      prev = on;
    }
    CHECK(ons > 0);
    CHECK(static_cast<std::uint64_t>(ons) == rec.final_load.on_events);
  }
}

TEST_CASE("converter input is regulated while conducting") {
  const auto& rec = car_record(Topology::converter_based);
  int conducting = 0;
  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    REQUIRE(rec.i_rect[k] >= 0.0);
    if (rec.i_rect[k] > 0.0) {
      ++conducting;
      REQUIRE(std::abs(rec.v_rect[k] - 1.0) <= 1e-3);
    }
  }
  CHECK(conducting > 0);
}

TEST_CASE("weak motion: only the converter-based design harvests") {
  // Scale a resonant sinusoid so the open-circuit terminal peaks at exactly 2.5 V.
  const auto unit = sinusoid(25.0, 1.0, 20.0);
  const auto oc = simulate(unit, {}, params(Topology::open_circuit));
  VibrationTrace weak = unit;
  weak.samples *= 2.5 / oc.v_ac.cwiseAbs().maxCoeff();
  CHECK(simulate(weak, {}, params(Topology::open_circuit)).v_ac.cwiseAbs().maxCoeff() == doctest::Approx(2.5));

  const auto cb = simulate(weak, {}, params(Topology::converter_based));
  const auto cl = simulate(weak, {}, params(Topology::converterless));
  CHECK(harvested_power(cb.v_cap, 220e-6, 20.0) > 0.0);
  CHECK(harvested_power(cl.v_cap, 220e-6, 20.0) == 0.0);
  CHECK(cl.i_rect.maxCoeff() == 0.0);
}

TEST_CASE("simulation is deterministic") {
  const auto trace = gen_mode_trace(Mode::bus, 5.0, 9, default_profile(Mode::bus));
  const auto a = simulate(trace, {}, params(Topology::converter_based));
  const auto b = simulate(trace, {}, params(Topology::converter_based));
  CHECK(a.v_cap == b.v_cap);
  CHECK(a.v_ac == b.v_ac);
}

TEST_CASE("circuit parameter validation") {
  auto p = params(Topology::converterless);
  p.v_thr_off = 4.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = params(Topology::converter_based);
  p.converter_efficiency = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(parse_topology("buck"), ValidationError);
  CircuitState c;
  c.v_cap = std::nan("");
  TransducerState t;
  CHECK_THROWS_AS(step_circuit(c, t, params(Topology::converterless), {}, 0.0, 1e-4), RuntimeError);
}
