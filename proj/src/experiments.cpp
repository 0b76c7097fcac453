#include "quadsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace quadsim {

PdBank::PdBank(const PdGains& altitude, const PdGains& attitude, double dt)
    : altitude_(altitude, dt), roll_(attitude, dt), pitch_(attitude, dt), yaw_(attitude, dt) {}

void PdBank::reset() {
  altitude_.reset();
  roll_.reset();
  pitch_.reset();
  yaw_.reset();
}

ControlVector PdBank::compute(const DesiredState& desired, const QuadState& state,
                              const QuadParams& params) {
  ControlVector u;
  u.thrust = altitude_control(altitude_, desired.z, state.position.z(), params);
  u.tau_phi = attitude_control(roll_, desired.phi, state.angles.phi);
  u.tau_theta = attitude_control(pitch_, desired.theta, state.angles.theta);
  u.tau_psi = attitude_control(yaw_, desired.psi, state.angles.psi);
  return u;
}

FuzzyBank::FuzzyBank(SugenoFis altitude_model, SugenoFis attitude_model, double dt)
    : altitude_model_(std::move(altitude_model)),
      attitude_model_(std::move(attitude_model)),
      dt_(dt) {}

void FuzzyBank::reset() {
  primed_ = false;
  prev_error_ = {};
}

ControlVector FuzzyBank::compute(const DesiredState& desired, const QuadState& state,
                                 const QuadParams& params) {
  const std::array<double, 4> error = {
      desired.z - state.position.z(), desired.phi - state.angles.phi,
      desired.theta - state.angles.theta, desired.psi - state.angles.psi};
  std::array<double, 4> rate{};
  if (primed_) {
    for (int i = 0; i < 4; ++i) rate[i] = (error[i] - prev_error_[i]) / dt_;
  }
  prev_error_ = error;
  primed_ = true;

  auto in1 = [](const SugenoFis& m, double v) { return std::clamp(v, m.input1_min, m.input1_max); };
  auto in2 = [](const SugenoFis& m, double v) { return std::clamp(v, m.input2_min, m.input2_max); };

  ControlVector u;
  u.thrust = fuzzy_controller_step(altitude_model_, in1(altitude_model_, error[0]),
                                   in2(altitude_model_, rate[0]), ControlAxis::kAltitude, params);
  u.tau_phi = fuzzy_controller_step(attitude_model_, in1(attitude_model_, error[1]),
                                    in2(attitude_model_, rate[1]), ControlAxis::kRoll, params);
  u.tau_theta = fuzzy_controller_step(attitude_model_, in1(attitude_model_, error[2]),
                                      in2(attitude_model_, rate[2]), ControlAxis::kPitch, params);
  u.tau_psi = fuzzy_controller_step(attitude_model_, in1(attitude_model_, error[3]),
                                    in2(attitude_model_, rate[3]), ControlAxis::kYaw, params);
  return u;
}

RotorSpeeds open_loop_profile(double t, const QuadParams& params) {
  if (t < -1e-9 || t > 8.0 + 1e-9) {
    throw OutOfWindow("open-loop profile defined on [0, 8] s, got t = " + std::to_string(t));
  }
  const double we = hover_speed(params);
  const double s = std::sin(std::numbers::pi * t);

  RotorSpeeds w;
  if (t <= 2.0) {
    for (int i = 0; i < 4; ++i) w[i] = 2000.0 * s + we;
    return w;
  }
  w[0] = 500.0 * s + we;
  w[1] = ((t <= 4.0 || t > 6.0) ? 250.0 : 500.0) * s + we;
  w[2] = (t <= 6.0 ? 250.0 : 500.0) * s + we;
  w[3] = (t <= 4.0 ? 500.0 : 250.0) * s + we;
  return w;
}

SimTrace run_open_loop(const QuadParams& params, double dt) {
  params.validate();
  const double duration = 8.0;
  const long steps = std::lround(duration / dt);
  if (steps < 1 || std::abs(steps * dt - duration) > 1e-9) {
    throw ValidationError("open-loop step size must divide the 8 s window");
  }

  SimTrace trace;
  trace.dt = dt;
  trace.samples.reserve(steps + 1);
  QuadState x;

  // The half-step sample of the final interval can land at 8 + eps; pin it.
  auto speeds_at = [&params](double tt) {
    return open_loop_profile(std::min(tt, 8.0), params);
  };

  for (long k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const RotorSpeeds w = open_loop_profile(t, params);
    trace.samples.push_back({t, x, speeds_to_controls(w, params), w, {}});
    if (k == steps) break;
    try {
      x = step_rk4(x, speeds_at, t, dt, params);
    } catch (const SingularAttitude& err) {
      trace.abort_reason = err.what();
      break;
    }
  }
  return trace;
}

SimTrace run_closed_loop(const ScenarioConfig& config, ControllerBank& controller) {
  config.params.validate();
  if (!(config.duration > 0.0) || !(config.dt > 0.0)) {
    throw ValidationError("duration and dt must be positive");
  }
  const long steps = std::lround(config.duration / config.dt);
  if (steps < 1 || std::abs(steps * config.dt - config.duration) > 1e-9) {
    throw ValidationError("duration must be an integer number of control periods");
  }

  controller.reset();
  SimTrace trace;
  trace.dt = config.dt;
  trace.samples.reserve(steps + 1);
  QuadState x = config.initial;

  for (long k = 0; k <= steps; ++k) {
    const double t = k * config.dt;
    ControlVector u;
    try {
      u = controller.compute(config.desired, x, config.params);
    } catch (const SimError& err) {
      trace.abort_reason = err.what();
      break;
    }
    const MixResult mixed = mix(u, config.params, config.limits);
    trace.samples.push_back({t, x, u, mixed.speeds, mixed.saturated});
    if (k == steps) break;
    try {
      x = (config.integrator == Integrator::kRk4)
              ? step_rk4(x, mixed.speeds, config.dt, config.params)
              : step_euler(x, mixed.speeds, config.dt, config.params);
    } catch (const SingularAttitude& err) {
      trace.abort_reason = err.what();
      break;
    }
  }
  return trace;
}

AxisMetrics regulation_metrics(const std::vector<double>& series, double dt, double desired) {
  if (series.empty()) throw ValidationError("metrics need a non-empty series");

  AxisMetrics m;
  m.initial_deviation = series.front() - desired;
  double dev_min = std::numeric_limits<double>::infinity();
  double dev_max = -std::numeric_limits<double>::infinity();
  for (double v : series) {
    const double d = v - desired;
    dev_min = std::min(dev_min, d);
    dev_max = std::max(dev_max, d);
    m.peak_deviation = std::max(m.peak_deviation, std::abs(d));
  }

  double normalizer = std::abs(m.initial_deviation);
  if (normalizer < 1e-9) normalizer = m.peak_deviation;
  if (normalizer < 1e-9) {
    m.settled = true;  // the axis never left the setpoint
    return m;
  }

  const double band = 0.02 * normalizer;
  std::size_t last_outside = 0;
  bool any_outside = false;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (std::abs(series[k] - desired) > band) {
      last_outside = k;
      any_outside = true;
    }
  }
  if (!any_outside) {
    m.settled = true;
    m.settling_time = 0.0;
  } else if (last_outside + 1 < series.size()) {
    m.settled = true;
    m.settling_time = static_cast<double>(last_outside + 1) * dt;
  } else {
    m.settled = false;
    m.settling_time = std::numeric_limits<double>::quiet_NaN();
  }

  if (std::abs(m.initial_deviation) >= 1e-9) {
    m.overshoot_abs = (m.initial_deviation > 0.0) ? std::max(0.0, -dev_min)
                                                  : std::max(0.0, dev_max);
  } else {
    m.overshoot_abs = m.peak_deviation;  // disturbance case: any excursion counts
  }
  m.overshoot_percent = 100.0 * m.overshoot_abs / normalizer;
  return m;
}

std::vector<double> axis_series(const SimTrace& trace, ControlAxis axis) {
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    switch (axis) {
      case ControlAxis::kAltitude: out.push_back(s.state.position.z()); break;
      case ControlAxis::kRoll: out.push_back(s.state.angles.phi); break;
      case ControlAxis::kPitch: out.push_back(s.state.angles.theta); break;
      case ControlAxis::kYaw: out.push_back(s.state.angles.psi); break;
    }
  }
  return out;
}

ComparisonReport compare_controllers(const SimTrace& base, const SimTrace& candidate,
                                     const DesiredState& desired) {
  if (std::abs(base.dt - candidate.dt) > 1e-12) {
    throw ValidationError("traces must share the sample period");
  }
  if (base.samples.size() != candidate.samples.size()) {
    throw ValidationError("traces must cover the same duration");
  }

  const ControlAxis axes[] = {ControlAxis::kAltitude, ControlAxis::kRoll, ControlAxis::kPitch,
                              ControlAxis::kYaw};
  const char* names[] = {"z", "phi", "theta", "psi"};
  const double setpoints[] = {desired.z, desired.phi, desired.theta, desired.psi};

  ComparisonReport report;
  for (int i = 0; i < 4; ++i) {
    AxisComparison& cmp = report.axes[i];
    cmp.name = names[i];
    cmp.base = regulation_metrics(axis_series(base, axes[i]), base.dt, setpoints[i]);
    cmp.candidate =
        regulation_metrics(axis_series(candidate, axes[i]), candidate.dt, setpoints[i]);
    if (cmp.base.settled && cmp.candidate.settled && cmp.base.settling_time > 0.0) {
      cmp.settling_improvement_percent =
          (cmp.base.settling_time - cmp.candidate.settling_time) / cmp.base.settling_time * 100.0;
    } else if (cmp.base.settled && cmp.candidate.settled) {
      cmp.settling_improvement_percent = 0.0;
    } else {
      cmp.settling_improvement_percent = std::numeric_limits<double>::quiet_NaN();
    }
    cmp.overshoot_delta = cmp.candidate.overshoot_percent - cmp.base.overshoot_percent;
  }
  return report;
}

namespace {

std::string fmt_time(const AxisMetrics& m) {
  if (!m.settled) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", m.settling_time);
  return buf;
}

std::string fmt_num(double v, const char* spec = "%.2f") {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string format_report(const ComparisonReport& report) {
  const double deg = 180.0 / std::numbers::pi;
  std::ostringstream out;
  out << "axis   settle_base[s]  settle_cand[s]  improve[%]  over_base[%]  over_cand[%]\n";
  for (const AxisComparison& cmp : report.axes) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-6s %-15s %-15s %-11s %-13s %-12s\n", cmp.name.c_str(),
                  fmt_time(cmp.base).c_str(), fmt_time(cmp.candidate).c_str(),
                  fmt_num(cmp.settling_improvement_percent).c_str(),
                  fmt_num(cmp.base.overshoot_percent).c_str(),
                  fmt_num(cmp.candidate.overshoot_percent).c_str());
    out << line;
  }
  const AxisComparison& psi = report.axes[3];
  out << "psi peak deviation: " << fmt_num(psi.base.peak_deviation * deg) << " deg (base), "
      << fmt_num(psi.candidate.peak_deviation * deg) << " deg (candidate)\n";
  return out.str();
}

namespace {

constexpr const char* kTraceHeader =
    "t,x,y,z,vx,vy,vz,phi,theta,psi,p,q,r,u1,u2,u3,u4,w1,w2,w3,w4,sat1,sat2,sat3,sat4";

void append_g9(std::string& line, double v, bool lead_comma = true) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  if (lead_comma) line += ',';
  line += buf;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw ParseError("cannot open trace file for writing: " + path);
  const double deg = 180.0 / std::numbers::pi;

  file << kTraceHeader << '\n';
  std::string line;
  for (const TraceSample& s : trace.samples) {
    line.clear();
    append_g9(line, s.t, false);
    for (int i = 0; i < 3; ++i) append_g9(line, s.state.position(i));
    for (int i = 0; i < 3; ++i) append_g9(line, s.state.velocity(i));
    append_g9(line, s.state.angles.phi * deg);
    append_g9(line, s.state.angles.theta * deg);
    append_g9(line, s.state.angles.psi * deg);
    append_g9(line, s.state.rates.p);
    append_g9(line, s.state.rates.q);
    append_g9(line, s.state.rates.r);
    append_g9(line, s.controls.thrust);
    append_g9(line, s.controls.tau_phi);
    append_g9(line, s.controls.tau_theta);
    append_g9(line, s.controls.tau_psi);
    for (int i = 0; i < 4; ++i) append_g9(line, s.speeds[i]);
    for (int i = 0; i < 4; ++i) line += s.saturated[i] ? ",1" : ",0";
    file << line << '\n';
  }
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open trace file: " + path);

  std::string line;
  if (!std::getline(file, line)) throw ParseError(path + ": empty trace file");
  if (line != kTraceHeader) throw ParseError(path + ": line 1: unexpected trace header");

  const double rad = std::numbers::pi / 180.0;
  SimTrace trace;
  int line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::array<double, 25> field{};
    std::string cell;
    for (int i = 0; i < 25; ++i) {
      if (!std::getline(in, cell, ',')) {
        throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 25 fields");
      }
      try {
        field[i] = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError(path + ": line " + std::to_string(line_no) + ": bad number '" + cell +
                         "'");
      }
    }
    TraceSample s;
    s.t = field[0];
    s.state.position = Vec3(field[1], field[2], field[3]);
    s.state.velocity = Vec3(field[4], field[5], field[6]);
    s.state.angles = {field[7] * rad, field[8] * rad, field[9] * rad};
    s.state.rates = {field[10], field[11], field[12]};
    s.controls = {field[13], field[14], field[15], field[16]};
    for (int i = 0; i < 4; ++i) s.speeds[i] = field[17 + i];
    for (int i = 0; i < 4; ++i) s.saturated[i] = field[21 + i] != 0.0;
    trace.samples.push_back(s);
  }
  if (trace.samples.size() < 2) throw ParseError(path + ": trace needs at least two samples");

  trace.dt = trace.samples[1].t - trace.samples[0].t;
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    if (std::abs(trace.samples[k].t - static_cast<double>(k) * trace.dt) > 1e-6) {
      throw ParseError(path + ": non-uniform sample times");
    }
  }
  return trace;
}

}  // namespace quadsim
