#pragma once

#include <map>
#include <string>
#include <vector>

#include "quadsim/actuation.hpp"
#include "quadsim/dynamics.hpp"

namespace quadsim {

/// Plain-text `key = value` file. Keys are case-insensitive, `#` starts a
/// comment, blank lines are skipped.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::string& path);
  static KeyValueFile from_string(const std::string& text, const std::string& name = "<string>");

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  /// Comma-separated list of numbers; missing key yields an empty list.
  std::vector<double> number_list(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

struct ParamSet {
  QuadParams quad;
  SpeedLimits limits;
};

/// Read plant parameters; absent keys keep the stock airframe defaults.
/// Recognized keys: mass, gravity, arm_length, ixx, iyy, izz, ct, cd, w_max.
ParamSet load_params(const std::string& path);
ParamSet params_from_file(const KeyValueFile& file);

/// One bifilar-pendulum run: each stopwatch reading covers n_osc swings of
/// the airframe hung on two strings d apart and L long.
struct BifilarMeasurement {
  double mass = 0.9;
  double gravity = 9.81;
  double string_separation = 0.21;
  double string_length = 0.24;
  int n_osc = 10;
  std::vector<double> times;
};

/// I = m g T^2 d^2 / (16 pi^2 L) with T the mean single-swing period.
double bifilar_inertia(const BifilarMeasurement& meas);

struct InertiaMeasurements {
  BifilarMeasurement x, y, z;
};

/// Measurement file keys: times_x, times_y, times_z (comma lists), n_osc,
/// d, L, mass, gravity. All three axes share the rig constants.
InertiaMeasurements load_measurements(const std::string& path);

}  // namespace quadsim
