#include <doctest.h>

#include "kehsim/circuit.hpp"
#include "kehsim/transducer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace kehsim;

namespace {

constexpr double kDt = 1.0 / kInternalRate;

// Open-circuit displacement RMS for a steady sinusoidal base acceleration.
double displacement_rms(const TransducerParams& p, double freq, double seconds = 4.0) {
  TransducerState s;
  const auto n = static_cast<int>(seconds * kInternalRate);
  double ss = 0.0;
  int counted = 0;
  for (int k = 0; k < n; ++k) {
    const double a = std::sin(2.0 * std::numbers::pi * freq * k * kDt);
    s = step_transducer(s, p, a, 0.0, kDt);
    if (k >= n / 2) { // after the transient
      ss += s.displacement * s.displacement;
      ++counted;
    }
  }
  return std::sqrt(ss / counted);
}

} // namespace

TEST_CASE("rest is a fixed point") {
  const TransducerParams p;
  TransducerState s;
  for (int k = 0; k < 100; ++k) s = step_transducer(s, p, 0.0, 0.0, kDt);
  CHECK(s.displacement == 0.0);
  CHECK(s.velocity == 0.0);
  CHECK(s.terminal_voltage == 0.0);
}

TEST_CASE("resonant frequency") {
  TransducerParams p;
  CHECK(resonant_frequency(p) == doctest::Approx(25.0).epsilon(0.004));
  p.mass = 1.0;
  p.stiffness = 4.0 * std::numbers::pi * std::numbers::pi;
  CHECK(resonant_frequency(p) == doctest::Approx(1.0));
  const double f1 = resonant_frequency(p);
  p.stiffness *= 2.0;
  CHECK(resonant_frequency(p) == doctest::Approx(f1 * std::sqrt(2.0)));
}

TEST_CASE("open-circuit sweep peaks at the resonance") {
  const TransducerParams p;
  double best_f = 0.0, best = -1.0;
  for (double f = 5.0; f <= 50.0 + 1e-9; f += 0.5) {
    const double r = displacement_rms(p, f, 2.0);
    if (r > best) {
      best = r;
      best_f = f;
    }
  }
  CHECK(std::abs(best_f - resonant_frequency(p)) <= 1.0);
}

TEST_CASE("open circuit from rest: voltage tracks displacement exactly") {
  const TransducerParams p;
  const double ratio = p.coupling / p.piezo_capacitance;
  TransducerState s;
  for (int k = 0; k < 20000; ++k) {
    const double a = 3.0 * std::sin(2.0 * std::numbers::pi * 23.0 * k * kDt) + 0.5 * std::sin(k * 0.01);
    s = step_transducer(s, p, a, 0.0, kDt);
    CHECK(std::abs(s.terminal_voltage - ratio * s.displacement) <= 1e-9 * std::max(1.0, std::abs(s.terminal_voltage)));
  }
}

TEST_CASE("free decay is passive") {
  const TransducerParams p;
  TransducerState s;
  s.displacement = 1e-3;
  s.velocity = 0.05;
  s.terminal_voltage = 2.0;
  double energy = s.stored_energy(p);
  for (int k = 0; k < 50000; ++k) {
    s = step_transducer(s, p, 0.0, 0.0, kDt);
    const double e = s.stored_energy(p);
    REQUIRE(e <= energy * (1.0 + 1e-12));
    energy = e;
  }
  // Open terminals trap the charge q = C_p·v − Θ·x, so the decay ends at the
  // least-energy state for that charge, q² / (2·(C_p + Θ²/k)), not at zero.
  const double q0 = p.piezo_capacitance * 2.0 - p.coupling * 1e-3;
  CHECK(p.piezo_capacitance * s.terminal_voltage - p.coupling * s.displacement == doctest::Approx(q0).epsilon(1e-9));
  const double floor = q0 * q0 / (2.0 * (p.piezo_capacitance + p.coupling * p.coupling / p.stiffness));
  const double initial = TransducerState{1e-3, 0.05, 2.0}.stored_energy(p);
  CHECK(energy >= floor * (1.0 - 1e-9));
  CHECK(energy - floor < 1e-3 * (initial - floor));
}

TEST_CASE("halving the step barely changes the logged voltage") {
  const TransducerParams p;
  auto run = [&](double rate) {
    TransducerState s;
    const int n = static_cast<int>(2.0 * rate);
    const int every = static_cast<int>(rate / 100.0);
    Eigen::VectorXd logged(n / every);
    for (int k = 0; k < n; ++k) {
      const double t = (k + 1) / rate;
      s = step_transducer(s, p, std::sin(2.0 * std::numbers::pi * 21.0 * t), 0.0, 1.0 / rate);
      if ((k + 1) % every == 0) logged[(k + 1) / every - 1] = s.terminal_voltage;
    }
    return logged;
  };
  const Eigen::VectorXd coarse = run(10000.0);
  const Eigen::VectorXd fine = run(20000.0);
  CHECK((coarse - fine).norm() / fine.norm() < 0.01);
}

TEST_CASE("invalid input") {
  TransducerParams p;
  CHECK_THROWS_AS(step_transducer({}, p, std::numeric_limits<double>::quiet_NaN(), 0.0, kDt), RuntimeError);
  CHECK_THROWS_AS(step_transducer({}, p, 0.0, 0.0, 0.0), std::exception);
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
