#include <doctest.h>

#include "kehsim/common.hpp"
#include "kehsim/config.hpp"
#include "kehsim/csv.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace kehsim;

TEST_CASE("config parses keys, comments and overrides") {
  const auto cfg = KeyValueConfig::parse("# header\n a = 1 \n\nb = x, y ,, z # trailing\na = 2\n");
  CHECK(cfg.get_int("a", 0) == 2);
  CHECK(cfg.get_list("b") == std::vector<std::string>{"x", "y", "z"});
  CHECK(cfg.get_double("missing", 3.5) == 3.5);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ValidationError);
}

TEST_CASE("typed getters name the offending key") {
  const auto cfg = KeyValueConfig::parse("x = abc\nflag = maybe\n");
  try {
    cfg.get_double("x", 0.0);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
  CHECK_THROWS_AS(cfg.get_bool("flag", false), ValidationError);
}

TEST_CASE("strict number parsing") {
  CHECK(parse_double("1.5e-3").value() == doctest::Approx(1.5e-3));
  CHECK_FALSE(parse_double("1.5x"));
  CHECK_FALSE(parse_double(""));
  CHECK_FALSE(parse_double("nan"));
}

TEST_CASE("mode labels") {
  for (Mode m : kClassModes) CHECK(parse_mode(to_string(m)) == m);
  try {
    parse_mode("boat");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    for (Mode m : kClassModes) CHECK(msg.find(std::string(to_string(m))) != std::string::npos);
  }
}

TEST_CASE("stage seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (const char* stage : {"trace", "smote", "fold", "rfe"})
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(7, stage, i));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, "trace", 3) == derive_seed(7, "trace", 3));
  CHECK(derive_seed(7, "trace", 3) != derive_seed(8, "trace", 3));
}

TEST_CASE("csv writer and validator agree") {
  const auto path = std::filesystem::temp_directory_path() / "kehsim_csv_test.csv";
  {
    CsvWriter w(path, {"a", "b"});
    w.cell(1.25).cell(std::string("x"));
    w.end_row();
    w.cell(-0.0).cell(std::string("y"));
    w.end_row();
  }
  CHECK_NOTHROW(validate_csv(path, {"a", "b"}));
  CHECK_THROWS_AS(validate_csv(path, {"a", "c"}), ValidationError);
  const auto table = read_csv(path);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1][0] == "0");
  std::filesystem::remove(path);
}
