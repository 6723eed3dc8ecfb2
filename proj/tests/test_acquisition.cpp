#include <doctest.h>

#include "kehsim/acquisition.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace kehsim;

namespace {

SimRecord run(Topology t, double seconds, std::uint64_t seed = 4) {
  CircuitParams p;
  p.topology = t;
  return simulate(gen_mode_trace(Mode::car, seconds, seed, default_profile(Mode::car)), {}, p);
}

std::vector<std::string> ids(const std::vector<SensingRecord>& recs) {
  std::vector<std::string> out;
  for (const auto& r : recs) out.push_back(r.signal_id);
  return out;
}

} // namespace

TEST_CASE("shunt amplifier") {
  const ShuntConfig s;
  CHECK(shunt_sense(1e-3, s) == doctest::Approx(1.0));
  CHECK(shunt_sense(0.0, s) == 0.0);
  CHECK(shunt_sense(10e-3, s) == 3.0);
  CHECK(shunt_sense(-1e-3, s) == 0.0);
}

TEST_CASE("adc quantization") {
  const AdcConfig adc;
  const int mid = adc_sample(1.5, adc);
  CHECK(std::abs(mid - 2048) <= 1);
  CHECK(adc_sample(-0.2, adc) == 0);
  CHECK(adc_sample(3.4, adc) == 4095);
  CHECK(adc_sample(3.0 / 4095.0, adc) == 1);
  for (double v = 0.0; v <= 3.0; v += 0.0007)
    REQUIRE(std::abs(adc_volts(adc_sample(v, adc), adc) - v) <= 0.5 * adc.lsb() + 1e-15);
}

TEST_CASE("adc config validation") {
  AdcConfig adc;
  adc.sample_rate = 300.0; // 10 kHz / 300 is not an integer
  CHECK_THROWS_AS(adc.validate(kInternalRate), ValidationError);
  adc = AdcConfig{};
  adc.resolution_bits = 0;
  CHECK_THROWS_AS(adc.validate(kInternalRate), ValidationError);
}

TEST_CASE("taps per topology") {
  const AdcConfig adc;
  const ShuntConfig shunt;
  CHECK(ids(sample_signals(run(Topology::open_circuit, 2.0), Mode::car, adc, shunt)) ==
        std::vector<std::string>{"OC-AC-V", "OC-REC-V"});
  CHECK(ids(sample_signals(run(Topology::converterless, 2.0), Mode::car, adc, shunt)) ==
        std::vector<std::string>{"CL-AC-V", "CL-REC-V", "CL-C"});
  CHECK(ids(sample_signals(run(Topology::converter_based, 2.0), Mode::car, adc, shunt)) ==
        std::vector<std::string>{"CB-C"});
}

TEST_CASE("a 60 s run gives 6000 codes per record, all in range") {
  const AdcConfig adc;
  const auto sim = run(Topology::converterless, 60.0);
  for (const auto& rec : sample_signals(sim, Mode::car, adc, {})) {
    CHECK(rec.size() == 6000);
    CHECK(rec.codes.minCoeff() >= 0);
    CHECK(rec.codes.maxCoeff() <= 4095);
    CHECK(rec.mode == Mode::car);
  }
  const auto trace = gen_mode_trace(Mode::car, 60.0, 4, default_profile(Mode::car));
  for (const auto& rec : sample_accelerometer(trace, adc)) CHECK(rec.size() == 6000);
}

TEST_CASE("engineering values are within half an LSB of the decimated taps") {
  const AdcConfig adc;
  const ShuntConfig shunt;
  const auto sim = run(Topology::converterless, 5.0);
  const auto recs = sample_signals(sim, Mode::car, adc, shunt);
  const Eigen::Index factor = 100;
  const double half = 0.5 * adc.lsb();
  for (Eigen::Index k = 0; k < recs[0].size(); ++k) {
    // Sample k of every record is internal sample k·N: one simulation instant.
    const double v_ac = sim.v_ac[k * factor];
    if (std::abs(v_ac * adc.divider_ratio) < 1.5)
      REQUIRE(std::abs(recs[0].engineering_values[k] - v_ac) <= half / adc.divider_ratio + 1e-12);
    const double v_rect = sim.v_rect[k * factor];
    if (v_rect * adc.divider_ratio <= 3.0)
      REQUIRE(std::abs(recs[1].engineering_values[k] - v_rect) <= half / adc.divider_ratio + 1e-12);
    const double i = sim.i_rect[k * factor];
    if (shunt_sense(i, shunt) < 3.0)
      REQUIRE(std::abs(recs[2].engineering_values[k] - i) <=
              half / (shunt.shunt_resistance * shunt.amplifier_gain) + 1e-15);
  }
}

TEST_CASE("accelerometer stand-in axes") {
  AdcConfig adc;
  VibrationTrace t;
  t.mode = Mode::bus;
  t.samples.resize(20000);
  for (Eigen::Index k = 0; k < t.samples.size(); ++k)
    t.samples[k] = 5.0 * std::sin(2.0 * std::numbers::pi * 2.0 * static_cast<double>(k) / kInternalRate);
  const auto axes = sample_accelerometer(t, adc);
  REQUIRE(axes.size() == 3);
  CHECK(axes[0].signal_id == "ACC-X");
  const double half = 0.5 * adc.lsb() * adc.accel_range / 1.5 + 1e-9;
  const double w = 2.0 * std::numbers::pi * 2.0;
  for (Eigen::Index k = 0; k < axes[0].size(); ++k) {
    const double t_s = static_cast<double>(k) / 100.0;
    REQUIRE(std::abs(axes[0].engineering_values[k] - 5.0 * std::sin(w * t_s)) <= half);
    const double z = t_s >= 0.005 ? 2.5 * std::sin(w * (t_s - 0.005)) : 0.0;
    REQUIRE(std::abs(axes[2].engineering_values[k] - z) <= half);
  }
  // Y is the quadrature copy: −cos for a sine, checked away from the record edges.
  for (Eigen::Index k = 50; k < 150; ++k)
    REQUIRE(std::abs(axes[1].engineering_values[k] + 5.0 * std::cos(w * static_cast<double>(k) / 100.0)) <= 0.5);
  CHECK(axes[0].mode == Mode::bus);
}

TEST_CASE("acquisition power") {
  CHECK(acquisition_power("CB-C") == doctest::Approx(2.7));
  CHECK(acquisition_power("CB-C") < 3.0);
  CHECK(acquisition_power("CL-C") == doctest::Approx(2.7));
  CHECK(acquisition_power("ACC") == doctest::Approx(7.2));
  CHECK(acquisition_power("OC-AC-V") == doctest::Approx(1.0));
  CHECK(acquisition_power("ACC-X") == doctest::Approx(2.4));
  CHECK_THROWS_AS(acquisition_power("GPS"), ValidationError);

  const PowerModel m;
  CHECK(m.keh_current() < m.accel_digital);
  CHECK(m.accel_digital < m.accel_analog);
  CHECK(m.accel_digital / m.keh_current() >= 2.0);
}

TEST_CASE("sensing csv round trip") {
  const auto rec = sample_signals(run(Topology::converter_based, 3.0), Mode::car, {}, {}).front();
  const auto path = std::filesystem::temp_directory_path() / "kehsim_sensing.csv";
  write_sensing_csv(path, rec);
  const auto back = read_sensing_csv(path);
  CHECK(back.signal_id == "CB-C");
  CHECK(back.mode == Mode::car);
  CHECK(back.codes == rec.codes);
  CHECK(back.sample_rate == doctest::Approx(100.0));
  CHECK((back.engineering_values - rec.engineering_values).cwiseAbs().maxCoeff() <= 1e-12);
  std::filesystem::remove(path);
}
