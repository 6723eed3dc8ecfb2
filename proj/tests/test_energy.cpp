#include <doctest.h>

#include "kehsim/csv.hpp"
#include "kehsim/energy.hpp"

#include <cmath>
#include <filesystem>

using namespace kehsim;

namespace {

// 100 Hz logger trace over 60 s: `rises` linear charges 2.18 → 3.38 V, each
// followed by an instant discharge back to 2.18 V.
Eigen::VectorXd sawtooth(int rises) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(6000, 2.18);
  const int period = 6000 / rises;
  for (int r = 0; r < rises; ++r)
    for (int k = 0; k < period / 2; ++k) v[r * period + k] = 2.18 + 1.2 * k / (period / 2 - 1.0);
  return v;
}

double find_apr(const EnergyReport& report, Mode mode, const std::string& id) {
  for (const auto& row : report.rows)
    if (row.mode == mode && row.signal_id == id) return row.apr;
  FAIL("row not found");
  return -1.0;
}

} // namespace

TEST_CASE("harvested power examples") {
  CHECK(harvested_power(Eigen::VectorXd::Constant(100, 3.0), 220e-6, 60.0) == 0.0);

  // Closed form: one charge stores ½·C·(3.38² − 2.18²).
  const double cycle_uj = 0.5 * 220e-6 * (3.38 * 3.38 - 2.18 * 2.18) * 1e6;
  CHECK(cycle_uj == doctest::Approx(733.92).epsilon(1e-4));
  CHECK(harvested_power(sawtooth(1), 220e-6, 60.0) == doctest::Approx(cycle_uj / 60.0));
  CHECK(harvested_power(sawtooth(1), 220e-6, 60.0) == doctest::Approx(12.23).epsilon(0.001));
  CHECK(harvested_power(sawtooth(3), 220e-6, 60.0) == doctest::Approx(3.0 * cycle_uj / 60.0));
  CHECK(harvested_power(sawtooth(3), 220e-6, 60.0) == doctest::Approx(36.7).epsilon(0.001));

  CHECK_THROWS_AS(harvested_power(sawtooth(1), 220e-6, 0.0), ValidationError);
  CHECK_THROWS_AS(harvested_power(Eigen::VectorXd(0), 220e-6, 1.0), ValidationError);
}

TEST_CASE("harvested power invariants") {
  const Eigen::VectorXd v = sawtooth(2) + 0.1 * Eigen::VectorXd::LinSpaced(6000, 0, 1);
  const double p = harvested_power(v, 220e-6, 60.0);
  CHECK(p > 0.0);
  CHECK(harvested_power(v, 3.0 * 220e-6, 60.0) == doctest::Approx(3.0 * p));
  const Eigen::VectorXd falling = Eigen::VectorXd::LinSpaced(100, 3.0, 2.0);
  CHECK(harvested_power(falling, 220e-6, 1.0) == 0.0);
  // The line falls ~0.0101 V per sample, so the bump must outpace that to register a rise.
  Eigen::VectorXd bump = falling;
  bump[50] += 0.05;
  CHECK(harvested_power(bump, 220e-6, 1.0) > 0.0);
}

TEST_CASE("apr and classification") {
  CHECK(apr(27.8, 2.7) == doctest::Approx(10.296).epsilon(1e-4));
  CHECK(apr(0.0, 1.0) == 0.0);
  CHECK(classify_apr(0.0) == AprClass::energy_negative);
  CHECK(classify_apr(1.0) == AprClass::energy_neutral);
  CHECK(classify_apr(1.0001) == AprClass::energy_positive);
  CHECK(apr(0.1, 2.7) == doctest::Approx(0.037).epsilon(0.01));
  CHECK(classify_apr(apr(0.1, 2.7)) == AprClass::energy_negative);
  CHECK_THROWS_AS(apr(1.0, 0.0), ValidationError);
  CHECK(to_string(AprClass::energy_positive) == "energy_positive");
}

TEST_CASE("reference rows from the field table") {
  const auto report = reference_report(reference_harvested_power());
  CHECK(report.rows.size() == 18);
  for (Mode m : {Mode::bus, Mode::car, Mode::tricycle, Mode::pedestrian}) {
    const double r = find_apr(report, m, "CB-C");
    CHECK(r >= 3.8);
    CHECK(r <= 10.5);
    // One-decimal rounding of the stated envelope.
    CHECK(std::round(r * 10.0) / 10.0 >= 3.9);
    CHECK(std::round(r * 10.0) / 10.0 <= 10.3);
  }
  CHECK(find_apr(report, Mode::car, "CB-C") == doctest::Approx(27.8 / 2.7));
  CHECK(find_apr(report, Mode::pedestrian, "CB-C") == doctest::Approx(10.5 / 2.7));
  CHECK(find_apr(report, Mode::ferry, "CB-C") < 1.0);
  CHECK(find_apr(report, Mode::train, "CB-C") < 1.0);
  CHECK(find_apr(report, Mode::ferry, "CL-C") == doctest::Approx(0.1 / 2.7));
  CHECK(find_apr(report, Mode::car, "CL-AC-V") == doctest::Approx(4.0 / 1.0));
}

TEST_CASE("reference csv matches the built-in table") {
  const auto loaded = load_reference_csv(std::filesystem::path(KEHSIM_SOURCE_DIR) / "data/reference_harvested_power.csv");
  const auto& builtin = reference_harvested_power();
  REQUIRE(loaded.size() == builtin.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].mode == builtin[i].mode);
    CHECK(loaded[i].converterless == builtin[i].converterless);
    CHECK(loaded[i].converter_based == builtin[i].converter_based);
  }
}

TEST_CASE("zero excitation gives zero APR everywhere") {
  VibrationTrace still;
  still.mode = Mode::bus;
  still.samples = Eigen::VectorXd::Zero(50000);
  std::vector<EnergyRun> runs;
  for (Topology t : {Topology::open_circuit, Topology::converterless, Topology::converter_based}) {
    CircuitParams p;
    p.topology = t;
    const auto sim = simulate(still, {}, p);
    for (auto& r : energy_runs(sim, Mode::bus, p)) runs.push_back(std::move(r));
  }
  const auto report = energy_report(runs);
  CHECK(report.rows.size() == 6);
  for (const auto& row : report.rows) {
    CHECK(row.apr == 0.0);
    CHECK(row.classification == AprClass::energy_negative);
    CHECK(row.acquisition_power > 0.0);
  }
  const auto acc = accelerometer_row(Mode::bus);
  CHECK(acc.apr == 0.0);
  CHECK(acc.acquisition_power == doctest::Approx(7.2));
  CHECK(acc.topology == "none");
}

TEST_CASE("simulated car: converter-based APR at least converter-less") {
  const auto trace = gen_mode_trace(Mode::car, 60.0, 1, default_profile(Mode::car));
  std::vector<EnergyRun> runs;
  for (Topology t : {Topology::converterless, Topology::converter_based}) {
    CircuitParams p;
    p.topology = t;
    for (auto& r : energy_runs(simulate(trace, {}, p), Mode::car, p)) runs.push_back(std::move(r));
  }
  const auto report = energy_report(runs);
  CHECK(find_apr(report, Mode::car, "CB-C") >= find_apr(report, Mode::car, "CL-C"));
  CHECK(find_apr(report, Mode::car, "CB-C") > 0.0);
}

TEST_CASE("energy csv") {
  const auto path = std::filesystem::temp_directory_path() / "kehsim_energy.csv";
  write_energy_csv(path, reference_report(reference_harvested_power()));
  CHECK_NOTHROW(validate_csv(path, kEnergyColumns));
  const auto table = read_csv(path);
  CHECK(table.rows.size() == 18);
  std::filesystem::remove(path);
}
