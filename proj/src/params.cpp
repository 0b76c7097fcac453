#include "quadsim/params.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace quadsim {

namespace {

std::string lowered(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return from_string(buffer.str(), path);
}

KeyValueFile KeyValueFile::from_string(const std::string& text, const std::string& name) {
  KeyValueFile out;
  out.name_ = name;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(name + ": line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = lowered(trimmed(line.substr(0, eq)));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(name + ": line " + std::to_string(line_no) + ": empty key or value");
    }
    out.values_[key] = value;
    out.lines_[key] = line_no;
  }
  return out;
}

bool KeyValueFile::has(const std::string& key) const {
  return values_.count(lowered(key)) != 0;
}

double KeyValueFile::number(const std::string& key, double fallback) const {
  const auto it = values_.find(lowered(key));
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) {
    throw ParseError(name_ + ": line " + std::to_string(lines_.at(it->first)) +
                     ": expected a number for '" + key + "', got '" + it->second + "'");
  }
  return parsed;
}

std::string KeyValueFile::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(lowered(key));
  return (it == values_.end()) ? fallback : it->second;
}

std::vector<double> KeyValueFile::number_list(const std::string& key) const {
  const auto it = values_.find(lowered(key));
  if (it == values_.end()) return {};

  std::vector<double> out;
  std::istringstream in(it->second);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    cell = trimmed(cell);
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (cell.empty() || used != cell.size()) {
      throw ParseError(name_ + ": line " + std::to_string(lines_.at(it->first)) +
                       ": bad list entry '" + cell + "' for '" + key + "'");
    }
    out.push_back(parsed);
  }
  return out;
}

ParamSet params_from_file(const KeyValueFile& file) {
  ParamSet set;
  set.quad.mass = file.number("mass", set.quad.mass);
  set.quad.gravity = file.number("gravity", set.quad.gravity);
  set.quad.arm_length = file.number("arm_length", set.quad.arm_length);
  set.quad.ixx = file.number("ixx", set.quad.ixx);
  set.quad.iyy = file.number("iyy", set.quad.iyy);
  set.quad.izz = file.number("izz", set.quad.izz);
  set.quad.thrust_coeff = file.number("ct", set.quad.thrust_coeff);
  set.quad.drag_coeff = file.number("cd", set.quad.drag_coeff);
  set.limits.w_max = file.number("w_max", set.limits.w_max);
  set.quad.validate();
  if (!(set.limits.w_max > set.limits.w_min)) {
    throw ValidationError("w_max must exceed the minimum rotor speed");
  }
  return set;
}

ParamSet load_params(const std::string& path) {
  return params_from_file(KeyValueFile::load(path));
}

double bifilar_inertia(const BifilarMeasurement& meas) {
  if (meas.times.empty()) throw ValidationError("bifilar measurement needs at least one time");
  if (!(meas.mass > 0.0)) throw ValidationError("mass must be positive");
  if (!(meas.gravity > 0.0)) throw ValidationError("gravity must be positive");
  if (!(meas.string_separation > 0.0)) throw ValidationError("string separation must be positive");
  if (!(meas.string_length > 0.0)) throw ValidationError("string length must be positive");
  if (meas.n_osc < 1) throw ValidationError("oscillation count must be positive");
  for (double t : meas.times) {
    if (!(t > 0.0)) throw ValidationError("oscillation times must be positive");
  }

  double mean = 0.0;
  for (double t : meas.times) mean += t;
  mean /= static_cast<double>(meas.times.size());
  const double period = mean / static_cast<double>(meas.n_osc);

  const double pi2 = std::numbers::pi * std::numbers::pi;
  return meas.mass * meas.gravity * period * period * meas.string_separation *
         meas.string_separation / (16.0 * pi2 * meas.string_length);
}

InertiaMeasurements load_measurements(const std::string& path) {
  const KeyValueFile file = KeyValueFile::load(path);

  BifilarMeasurement shared;
  shared.mass = file.number("mass", shared.mass);
  shared.gravity = file.number("gravity", shared.gravity);
  shared.string_separation = file.number("d", shared.string_separation);
  shared.string_length = file.number("l", shared.string_length);
  shared.n_osc = static_cast<int>(std::lround(file.number("n_osc", shared.n_osc)));

  InertiaMeasurements out{shared, shared, shared};
  out.x.times = file.number_list("times_x");
  out.y.times = file.number_list("times_y");
  out.z.times = file.number_list("times_z");
  if (out.x.times.empty() || out.y.times.empty() || out.z.times.empty()) {
    throw ParseError(path + ": times_x, times_y and times_z must each list at least one reading");
  }
  return out;
}

}  // namespace quadsim
