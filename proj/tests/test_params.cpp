#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "quadsim/control_linear.hpp"
#include "quadsim/params.hpp"

using namespace quadsim;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "quadsim_param_tests";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path) << text;
  return path;
}

BifilarMeasurement reference_run_x() {
  BifilarMeasurement meas;
  meas.times = {12.15, 12.23, 12.15};
  return meas;
}

}  // namespace

TEST_SUITE("params") {

TEST_CASE("key-value files ignore comments, case and padding") {
  const KeyValueFile kv = KeyValueFile::from_string(
      "# rig description\n"
      "\n"
      "  Mass =  1.25   # kg\n"
      "ARM_LENGTH=0.3\n"
      "label = bench airframe\n");
  CHECK(kv.has("mass"));
  CHECK(kv.has("MASS"));
  CHECK(!kv.has("gravity"));
  CHECK(kv.number("mass", 0.0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(kv.number("arm_length", 0.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(kv.number("gravity", 9.81) == doctest::Approx(9.81).epsilon(1e-15));
  CHECK(kv.text("label", "") == "bench airframe");
  CHECK(kv.entries().size() == 3);
}

TEST_CASE("malformed entries are rejected with their line number") {
  CHECK_THROWS_WITH_AS(KeyValueFile::from_string("mass = 0.9\njust words\n"),
                       doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_WITH_AS(KeyValueFile::from_string("mass =\n"), doctest::Contains("line 1"),
                       ParseError);

  const KeyValueFile kv = KeyValueFile::from_string("mass = 0.9\nixx = heavy\n");
  CHECK_THROWS_WITH_AS(kv.number("ixx", 0.0), doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_WITH_AS(kv.number("ixx", 0.0), doctest::Contains("heavy"), ParseError);

  const KeyValueFile list = KeyValueFile::from_string("times_x = 12.1, oops, 12.3\n");
  CHECK_THROWS_AS(list.number_list("times_x"), ParseError);
  CHECK(list.number_list("times_y").empty());
}

TEST_CASE("missing config files are reported") {
  CHECK_THROWS_AS(KeyValueFile::load("/nonexistent/quadsim.cfg"), ParseError);
  CHECK_THROWS_AS(load_params("/nonexistent/quadsim.cfg"), ParseError);
}

TEST_CASE("plant parameters default and override per key") {
  const ParamSet stock = params_from_file(KeyValueFile::from_string(""));
  CHECK(stock.quad.mass == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(stock.quad.gravity == doctest::Approx(9.81).epsilon(1e-15));
  CHECK(stock.quad.arm_length == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(stock.quad.ixx == doctest::Approx(1.467e-2).epsilon(1e-15));
  CHECK(stock.quad.iyy == doctest::Approx(1.667e-2).epsilon(1e-15));
  CHECK(stock.quad.izz == doctest::Approx(1.325e-2).epsilon(1e-15));
  CHECK(stock.quad.thrust_coeff == doctest::Approx(4.980e-8).epsilon(1e-15));
  CHECK(stock.quad.drag_coeff == doctest::Approx(5.804e-9).epsilon(1e-15));
  CHECK(stock.limits.w_max == doctest::Approx(12000.0).epsilon(1e-15));

  const ParamSet mixed = params_from_file(
      KeyValueFile::from_string("mass = 1.2\nizz = 2.0e-2\nw_max = 9000\n"));
  CHECK(mixed.quad.mass == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(mixed.quad.izz == doctest::Approx(2.0e-2).epsilon(1e-15));
  CHECK(mixed.quad.ixx == doctest::Approx(1.467e-2).epsilon(1e-15));
  CHECK(mixed.limits.w_max == doctest::Approx(9000.0).epsilon(1e-15));
}

TEST_CASE("quadrupling the thrust coefficient halves the hover speed") {
  const ParamSet stock = params_from_file(KeyValueFile::from_string(""));
  const ParamSet hot = params_from_file(KeyValueFile::from_string("ct = 1.992e-7\n"));
  CHECK(hover_speed(hot.quad) ==
        doctest::Approx(0.5 * hover_speed(stock.quad)).epsilon(1e-12));
}

TEST_CASE("non-physical parameters are named in the rejection") {
  CHECK_THROWS_WITH_AS(params_from_file(KeyValueFile::from_string("mass = -0.9\n")),
                       doctest::Contains("mass"), ValidationError);
  CHECK_THROWS_AS(params_from_file(KeyValueFile::from_string("ixx = 0\n")), ValidationError);
  CHECK_THROWS_AS(params_from_file(KeyValueFile::from_string("w_max = 0\n")), ValidationError);
  CHECK_THROWS_AS(params_from_file(KeyValueFile::from_string("w_max = -10\n")),
                  ValidationError);
}

TEST_CASE("bifilar inertia reproduces the bench readings") {
  const double ix = bifilar_inertia(reference_run_x());
  CHECK(ix == doctest::Approx(0.0152327).epsilon(1e-4));

  // The stopwatch estimate lands within a few percent of the catalog value.
  const double catalog = 1.467e-2;
  CHECK(std::abs(ix - catalog) / catalog < 0.06);
  CHECK(std::abs(ix - catalog) / catalog == doctest::Approx(0.0384).epsilon(0.01));

  BifilarMeasurement z = reference_run_x();
  z.times = {13.32, 13.12, 13.41};
  CHECK(bifilar_inertia(z) == doctest::Approx(0.0181273).epsilon(1e-4));
}

TEST_CASE("bifilar estimate is invariant to reading order") {
  BifilarMeasurement fwd = reference_run_x();
  BifilarMeasurement rev = reference_run_x();
  rev.times = {12.15, 12.23, 12.15};
  std::reverse(rev.times.begin(), rev.times.end());
  CHECK(bifilar_inertia(fwd) == doctest::Approx(bifilar_inertia(rev)).epsilon(1e-15));
}

TEST_CASE("bifilar estimate scales like the closed form") {
  const BifilarMeasurement base = reference_run_x();
  const double i0 = bifilar_inertia(base);

  BifilarMeasurement slow = base;
  for (double& t : slow.times) t *= 2.0;
  CHECK(bifilar_inertia(slow) == doctest::Approx(4.0 * i0).epsilon(1e-12));

  BifilarMeasurement wide = base;
  wide.string_separation *= 3.0;
  CHECK(bifilar_inertia(wide) == doctest::Approx(9.0 * i0).epsilon(1e-12));

  BifilarMeasurement long_strings = base;
  long_strings.string_length *= 2.0;
  CHECK(bifilar_inertia(long_strings) == doctest::Approx(0.5 * i0).epsilon(1e-12));

  BifilarMeasurement heavy = base;
  heavy.mass *= 1.7;
  CHECK(bifilar_inertia(heavy) == doctest::Approx(1.7 * i0).epsilon(1e-12));
}

TEST_CASE("bifilar input validation names the offending quantity") {
  BifilarMeasurement empty = reference_run_x();
  empty.times.clear();
  CHECK_THROWS_AS(bifilar_inertia(empty), ValidationError);

  BifilarMeasurement negative = reference_run_x();
  negative.times[1] = -12.0;
  CHECK_THROWS_AS(bifilar_inertia(negative), ValidationError);

  BifilarMeasurement no_swings = reference_run_x();
  no_swings.n_osc = 0;
  CHECK_THROWS_AS(bifilar_inertia(no_swings), ValidationError);
}

TEST_CASE("measurement files carry three axes and shared rig constants") {
  const fs::path path = write_temp("measurements.cfg",
                                   "# bifilar rig\n"
                                   "d = 0.21\n"
                                   "L = 0.24\n"
                                   "times_x = 12.15, 12.23, 12.15\n"
                                   "times_y = 12.9, 13.0\n"
                                   "times_z = 13.32, 13.12, 13.41\n");
  const InertiaMeasurements meas = load_measurements(path.string());
  CHECK(meas.x.n_osc == 10);
  CHECK(meas.x.mass == doctest::Approx(0.9).epsilon(1e-15));
  REQUIRE(meas.x.times.size() == 3);
  REQUIRE(meas.y.times.size() == 2);
  CHECK(meas.y.times[1] == doctest::Approx(13.0).epsilon(1e-15));
  CHECK(meas.x.string_separation == meas.z.string_separation);
  CHECK(bifilar_inertia(meas.x) == doctest::Approx(0.0152327).epsilon(1e-4));
  CHECK(bifilar_inertia(meas.z) == doctest::Approx(0.0181273).epsilon(1e-4));

  const fs::path incomplete = write_temp("measurements_missing_axis.cfg",
                                         "times_x = 12.15\n"
                                         "times_y = 12.9\n");
  CHECK_THROWS_AS(load_measurements(incomplete.string()), ParseError);
}

}  // TEST_SUITE
