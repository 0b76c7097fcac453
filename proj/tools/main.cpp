#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "quadsim/experiments.hpp"
#include "quadsim/params.hpp"
#include "svg_chart.hpp"

namespace fs = std::filesystem;
using namespace quadsim;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kRad = std::numbers::pi / 180.0;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// ---------------------------------------------------------------- output ----

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::trunc | std::ios::binary);
    if (!file) throw ParseError("cannot write " + path.string());
    file << content;
  }
  fs::rename(tmp, path);
}

void write_trace_atomic(const SimTrace& trace, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_trace_csv(trace, tmp.string());
  fs::rename(tmp, path);
}

void save_fis_atomic(const SugenoFis& fis, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  save_fis(fis, tmp.string());
  fs::rename(tmp, path);
}

struct Manifest {
  std::vector<std::pair<std::string, std::string>> rows;

  void add(const std::string& key, const std::string& value) { rows.emplace_back(key, value); }
  void add(const std::string& key, double value) { rows.emplace_back(key, fmt(value)); }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : rows) out += k + " = " + v + "\n";
    return out;
  }
};

void add_param_rows(Manifest& m, const ParamSet& set) {
  m.add("mass", set.quad.mass);
  m.add("gravity", set.quad.gravity);
  m.add("arm_length", set.quad.arm_length);
  m.add("ixx", set.quad.ixx);
  m.add("iyy", set.quad.iyy);
  m.add("izz", set.quad.izz);
  m.add("ct", set.quad.thrust_coeff);
  m.add("cd", set.quad.drag_coeff);
  m.add("w_max", set.limits.w_max);
}

void add_scenario_rows(Manifest& m, const ScenarioConfig& cfg) {
  m.add("duration", cfg.duration);
  m.add("dt", cfg.dt);
  m.add("integrator", cfg.integrator == Integrator::kRk4 ? "rk4" : "euler");
  m.add("initial_x", cfg.initial.position.x());
  m.add("initial_y", cfg.initial.position.y());
  m.add("initial_z", cfg.initial.position.z());
  m.add("initial_vx", cfg.initial.velocity.x());
  m.add("initial_vy", cfg.initial.velocity.y());
  m.add("initial_vz", cfg.initial.velocity.z());
  m.add("initial_phi_deg", cfg.initial.angles.phi * kDeg);
  m.add("initial_theta_deg", cfg.initial.angles.theta * kDeg);
  m.add("initial_psi_deg", cfg.initial.angles.psi * kDeg);
  m.add("initial_p", cfg.initial.rates.p);
  m.add("initial_q", cfg.initial.rates.q);
  m.add("initial_r", cfg.initial.rates.r);
  m.add("desired_z", cfg.desired.z);
  m.add("desired_phi_deg", cfg.desired.phi * kDeg);
  m.add("desired_theta_deg", cfg.desired.theta * kDeg);
  m.add("desired_psi_deg", cfg.desired.psi * kDeg);
}

// ---------------------------------------------------------------- config ----

std::string effective_config(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("QUADSIM_CONFIG");
  return env ? env : "";
}

ParamSet load_set(const std::string& config_path) {
  return config_path.empty() ? ParamSet{} : load_params(config_path);
}

KeyValueFile load_kv(const std::string& config_path) {
  return config_path.empty() ? KeyValueFile::from_string("", "<defaults>")
                             : KeyValueFile::load(config_path);
}

bool has_initial_keys(const KeyValueFile& kv) {
  for (const char* key : {"initial_x", "initial_y", "initial_z", "initial_vx", "initial_vy",
                          "initial_vz", "initial_phi_deg", "initial_theta_deg", "initial_psi_deg",
                          "initial_p", "initial_q", "initial_r"}) {
    if (kv.has(key)) return true;
  }
  return false;
}

ScenarioConfig scenario_from_kv(const KeyValueFile& kv, const ParamSet& set) {
  ScenarioConfig cfg;
  cfg.params = set.quad;
  cfg.limits = set.limits;
  cfg.duration = kv.number("duration", cfg.duration);
  cfg.dt = kv.number("dt", cfg.dt);

  const std::string integ = kv.text("integrator", "rk4");
  if (integ == "rk4") cfg.integrator = Integrator::kRk4;
  else if (integ == "euler") cfg.integrator = Integrator::kEuler;
  else throw ParseError("unknown integrator '" + integ + "' (expected rk4 or euler)");

  cfg.initial.position =
      Vec3(kv.number("initial_x", 0.0), kv.number("initial_y", 0.0), kv.number("initial_z", 0.0));
  cfg.initial.velocity = Vec3(kv.number("initial_vx", 0.0), kv.number("initial_vy", 0.0),
                              kv.number("initial_vz", 0.0));
  cfg.initial.angles = {kv.number("initial_phi_deg", 0.0) * kRad,
                        kv.number("initial_theta_deg", 0.0) * kRad,
                        kv.number("initial_psi_deg", 0.0) * kRad};
  cfg.initial.rates = {kv.number("initial_p", 0.0), kv.number("initial_q", 0.0),
                       kv.number("initial_r", 0.0)};
  cfg.desired.z = kv.number("desired_z", 0.0);
  cfg.desired.phi = kv.number("desired_phi_deg", 0.0) * kRad;
  cfg.desired.theta = kv.number("desired_theta_deg", 0.0) * kRad;
  cfg.desired.psi = kv.number("desired_psi_deg", 0.0) * kRad;
  return cfg;
}

void apply_case_preset(ScenarioConfig& cfg, const std::string& name) {
  cfg.initial = QuadState{};
  cfg.desired = DesiredState{};
  if (name == "sec54") {
    cfg.initial.position.z() = 2.0;
    cfg.initial.angles = {15.0 * kRad, 15.0 * kRad, 15.0 * kRad};
  } else if (name == "case1") {
    cfg.initial.position.z() = 2.0;
    cfg.initial.angles = {30.0 * kRad, -30.0 * kRad, 0.0};
  } else if (name == "case2") {
    cfg.initial.position.z() = 0.0;
    cfg.initial.angles = {70.0 * kRad, -60.0 * kRad, 20.0 * kRad};
  } else {
    throw ParseError("unknown case '" + name + "'");
  }
}

// ----------------------------------------------------------------- plots ----

std::vector<double> column(const SimTrace& trace, const std::function<double(const TraceSample&)>& pick) {
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) out.push_back(pick(s));
  return out;
}

void plot_angles(const SimTrace& trace, const fs::path& path, const std::string& title) {
  const auto t = column(trace, [](const TraceSample& s) { return s.t; });
  const auto phi = column(trace, [](const TraceSample& s) { return s.state.angles.phi * kDeg; });
  const auto theta = column(trace, [](const TraceSample& s) { return s.state.angles.theta * kDeg; });
  const auto psi = column(trace, [](const TraceSample& s) { return s.state.angles.psi * kDeg; });
  write_text_atomic(path, chart::render_line_chart(title, "t [s]", "angle [deg]",
                                                   {{"phi", &t, &phi},
                                                    {"theta", &t, &theta},
                                                    {"psi", &t, &psi}}));
}

void plot_speeds(const SimTrace& trace, const fs::path& path, const std::string& title) {
  const auto t = column(trace, [](const TraceSample& s) { return s.t; });
  const auto w1 = column(trace, [](const TraceSample& s) { return s.speeds.w1; });
  const auto w2 = column(trace, [](const TraceSample& s) { return s.speeds.w2; });
  const auto w3 = column(trace, [](const TraceSample& s) { return s.speeds.w3; });
  const auto w4 = column(trace, [](const TraceSample& s) { return s.speeds.w4; });
  write_text_atomic(path, chart::render_line_chart(title, "t [s]", "rotor speed [rpm]",
                                                   {{"w1", &t, &w1},
                                                    {"w2", &t, &w2},
                                                    {"w3", &t, &w3},
                                                    {"w4", &t, &w4}}));
}

// --------------------------------------------------------------- reports ----

std::string metrics_text(const SimTrace& trace, const DesiredState& desired,
                         const std::string& heading) {
  const struct {
    const char* name;
    ControlAxis axis;
    double setpoint;
    double scale;
    const char* unit;
  } axes[] = {{"z", ControlAxis::kAltitude, desired.z, 1.0, "m"},
              {"phi", ControlAxis::kRoll, desired.phi, kDeg, "deg"},
              {"theta", ControlAxis::kPitch, desired.theta, kDeg, "deg"},
              {"psi", ControlAxis::kYaw, desired.psi, kDeg, "deg"}};

  std::ostringstream out;
  out << heading << '\n';
  out << "axis     settled  settle[s]  overshoot[%]  peak_dev        initial_dev\n";
  for (const auto& row : axes) {
    const AxisMetrics m = regulation_metrics(axis_series(trace, row.axis), trace.dt, row.setpoint);
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %-8s %-10s %-13s %-15s %s\n", row.name,
                  m.settled ? "yes" : "no",
                  m.settled ? fmt(m.settling_time, "%.2f").c_str() : "n/a",
                  fmt(m.overshoot_percent, "%.2f").c_str(),
                  (fmt(m.peak_deviation * row.scale, "%.4g") + " " + row.unit).c_str(),
                  (fmt(m.initial_deviation * row.scale, "%.4g") + " " + row.unit).c_str());
    out << line;
  }

  double w_peak = 0.0, t_peak = 0.0;
  long saturated = 0;
  for (const TraceSample& s : trace.samples) {
    for (int i = 0; i < 4; ++i) {
      if (s.speeds[i] > w_peak) {
        w_peak = s.speeds[i];
        t_peak = s.t;
      }
      if (s.saturated[i]) ++saturated;
    }
  }
  const RotorSpeeds& last = trace.samples.back().speeds;
  out << "max rotor speed [rpm]: " << fmt(w_peak, "%.1f") << " at t = " << fmt(t_peak, "%.2f")
      << " s\n";
  out << "terminal speeds [rpm]: " << fmt(last.w1, "%.1f") << ' ' << fmt(last.w2, "%.1f") << ' '
      << fmt(last.w3, "%.1f") << ' ' << fmt(last.w4, "%.1f") << '\n';
  out << "saturated motor samples: " << saturated << " of " << 4 * trace.samples.size() << '\n';
  if (trace.aborted()) out << "aborted: " << trace.abort_reason << '\n';
  return out.str();
}

// -------------------------------------------------------------- commands ----

int finish_run(const SimTrace& trace) {
  if (trace.aborted()) {
    std::cerr << "run aborted: " << trace.abort_reason << '\n';
    return 4;
  }
  return 0;
}

int cmd_open_loop(const std::string& config, const std::string& out_dir, double dt) {
  const ParamSet set = load_set(config);
  fs::create_directories(out_dir);

  const SimTrace trace = run_open_loop(set.quad, dt);

  const fs::path out(out_dir);
  write_trace_atomic(trace, out / "trace.csv");

  const auto t = column(trace, [](const TraceSample& s) { return s.t; });
  const auto x = column(trace, [](const TraceSample& s) { return s.state.position.x(); });
  const auto y = column(trace, [](const TraceSample& s) { return s.state.position.y(); });
  const auto z = column(trace, [](const TraceSample& s) { return s.state.position.z(); });
  write_text_atomic(out / "positions.svg",
                    chart::render_line_chart("Open-loop position", "t [s]", "position [m]",
                                             {{"x", &t, &x}, {"y", &t, &y}, {"z", &t, &z}}));
  plot_angles(trace, out / "angles.svg", "Open-loop attitude");
  plot_speeds(trace, out / "inputs.svg", "Open-loop rotor inputs");

  Manifest m;
  m.add("command", "open-loop");
  m.add("version", kVersion);
  m.add("dt", dt);
  add_param_rows(m, set);
  m.add("outputs", "trace.csv,positions.svg,angles.svg,inputs.svg");
  write_text_atomic(out / "manifest.txt", m.str());

  std::cout << "open-loop trace: " << (out / "trace.csv").string() << " ("
            << trace.samples.size() << " samples)\n";
  return finish_run(trace);
}

int cmd_closed_loop(const std::string& config, const std::string& out_dir,
                    const std::string& controller, const std::string& case_name,
                    const std::string& alt_model, const std::string& att_model) {
  const KeyValueFile kv = load_kv(config);
  const ParamSet set = params_from_file(kv);

  ScenarioConfig cfg = scenario_from_kv(kv, set);
  if (case_name == "custom") {
    if (config.empty() || !has_initial_keys(kv)) {
      std::cerr << "custom case needs a config file with initial-state keys\n";
      return 2;
    }
  } else {
    apply_case_preset(cfg, case_name);
  }

  std::unique_ptr<ControllerBank> bank;
  if (controller == "pd") {
    bank = std::make_unique<PdBank>(PdGains::altitude_default(), PdGains::attitude_default(),
                                    cfg.dt);
  } else if (controller == "fuzzy") {
    if (alt_model.empty() || att_model.empty()) {
      std::cerr << "fuzzy controller needs --alt-model and --att-model files\n";
      return 3;
    }
    if (!fs::exists(alt_model) || !fs::exists(att_model)) {
      std::cerr << "model file not found: " << (!fs::exists(alt_model) ? alt_model : att_model)
                << '\n';
      return 3;
    }
    bank = std::make_unique<FuzzyBank>(load_fis(alt_model), load_fis(att_model), cfg.dt);
  } else {
    std::cerr << "unknown controller '" << controller << "'\n";
    return 2;
  }

  fs::create_directories(out_dir);
  const SimTrace trace = run_closed_loop(cfg, *bank);

  const fs::path out(out_dir);
  write_trace_atomic(trace, out / "trace.csv");

  const auto t = column(trace, [](const TraceSample& s) { return s.t; });
  const auto z = column(trace, [](const TraceSample& s) { return s.state.position.z(); });
  write_text_atomic(out / "altitude.svg",
                    chart::render_line_chart("Closed-loop altitude (" + controller + ")", "t [s]",
                                             "z [m]", {{"z", &t, &z}}));
  plot_angles(trace, out / "attitude.svg", "Closed-loop attitude (" + controller + ")");
  plot_speeds(trace, out / "speeds.svg", "Closed-loop rotor speeds (" + controller + ")");

  const std::string report =
      metrics_text(trace, cfg.desired, "scenario: " + case_name + " (" + controller + ")");
  write_text_atomic(out / "metrics.txt", report);
  std::cout << report;

  Manifest m;
  m.add("command", "closed-loop");
  m.add("version", kVersion);
  m.add("controller", controller);
  m.add("case", case_name);
  if (!alt_model.empty()) m.add("alt_model", fs::absolute(alt_model).string());
  if (!att_model.empty()) m.add("att_model", fs::absolute(att_model).string());
  add_param_rows(m, set);
  add_scenario_rows(m, cfg);
  m.add("outputs", "trace.csv,altitude.svg,attitude.svg,speeds.svg,metrics.txt");
  write_text_atomic(out / "manifest.txt", m.str());
  return finish_run(trace);
}

int cmd_train_anfis(const std::string& config, const std::string& out_dir, unsigned seed) {
  const KeyValueFile kv = load_kv(config);
  const ParamSet set = params_from_file(kv);

  TeacherBattery battery = default_training_battery(seed);
  battery.skip_initial_steps =
      static_cast<int>(kv.number("skip_initial_steps", battery.skip_initial_steps));

  TrainConfig tc;
  tc.seed = seed;
  tc.epochs = static_cast<int>(kv.number("epochs", tc.epochs));
  tc.learning_rate = kv.number("learning_rate", tc.learning_rate);
  tc.holdout = kv.number("holdout", tc.holdout);

  const TeacherData data = generate_training_data(battery, set.quad, PdGains::altitude_default(),
                                                  PdGains::attitude_default(), set.limits);
  std::cout << "teacher data: " << data.altitude.rows.size() << " altitude rows, "
            << data.attitude.rows.size() << " attitude rows\n";

  SugenoFis altitude = anfis_init(data.altitude);
  const TrainReport alt_report = anfis_train(altitude, data.altitude, tc);
  SugenoFis attitude = anfis_init(data.attitude);
  const TrainReport att_report = anfis_train(attitude, data.attitude, tc);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  save_fis_atomic(altitude, out / "fis_altitude.txt");
  save_fis_atomic(attitude, out / "fis_attitude.txt");

  std::string history = "epoch,altitude_rmse_before,altitude_rmse_after,attitude_rmse_before,"
                        "attitude_rmse_after\n";
  for (std::size_t e = 0; e < alt_report.rmse_history.size(); ++e) {
    history += std::to_string(e + 1) + ',' + fmt(alt_report.rmse_before_lsq[e], "%.9g") + ',' +
               fmt(alt_report.rmse_history[e], "%.9g") + ',' +
               fmt(att_report.rmse_before_lsq[e], "%.9g") + ',' +
               fmt(att_report.rmse_history[e], "%.9g") + '\n';
  }
  write_text_atomic(out / "rmse_history.csv", history);

  Manifest m;
  m.add("command", "train-anfis");
  m.add("version", kVersion);
  m.add("seed", static_cast<double>(seed));
  m.add("epochs", static_cast<double>(tc.epochs));
  m.add("learning_rate", tc.learning_rate);
  m.add("holdout", tc.holdout);
  m.add("skip_initial_steps", static_cast<double>(battery.skip_initial_steps));
  add_param_rows(m, set);
  m.add("outputs", "fis_altitude.txt,fis_attitude.txt,rmse_history.csv");
  write_text_atomic(out / "manifest.txt", m.str());

  std::cout << "altitude holdout rmse: " << fmt(alt_report.holdout_rmse, "%.6g") << " N\n";
  std::cout << "attitude holdout rmse: " << fmt(att_report.holdout_rmse, "%.6g") << " N m\n";
  std::cout << "models written to " << out_dir << '\n';
  return 0;
}

int cmd_compare(const std::string& base_path, const std::string& cand_path,
                const std::string& out_dir) {
  const SimTrace base = read_trace_csv(base_path);
  const SimTrace cand = read_trace_csv(cand_path);
  const ComparisonReport report = compare_controllers(base, cand);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::string text = "base:      " + base_path + "\ncandidate: " + cand_path + "\n\n";
  text += format_report(report);
  write_text_atomic(out / "report.txt", text);
  std::cout << text;

  std::string csv =
      "axis,settle_base_s,settle_cand_s,improvement_pct,overshoot_base_pct,overshoot_cand_pct,"
      "peak_dev_base,peak_dev_cand\n";
  for (const AxisComparison& ax : report.axes) {
    csv += ax.name + ',' +
           (ax.base.settled ? fmt(ax.base.settling_time, "%.9g") : "nan") + ',' +
           (ax.candidate.settled ? fmt(ax.candidate.settling_time, "%.9g") : "nan") + ',' +
           fmt(ax.settling_improvement_percent, "%.9g") + ',' +
           fmt(ax.base.overshoot_percent, "%.9g") + ',' +
           fmt(ax.candidate.overshoot_percent, "%.9g") + ',' +
           fmt(ax.base.peak_deviation, "%.9g") + ',' +
           fmt(ax.candidate.peak_deviation, "%.9g") + '\n';
  }
  write_text_atomic(out / "report.csv", csv);

  const auto tb = column(base, [](const TraceSample& s) { return s.t; });
  const auto tc = column(cand, [](const TraceSample& s) { return s.t; });
  const struct {
    const char* file;
    const char* title;
    std::function<double(const TraceSample&)> pick;
  } overlays[] = {
      {"overlay_z.svg", "Altitude", [](const TraceSample& s) { return s.state.position.z(); }},
      {"overlay_phi.svg", "Roll", [](const TraceSample& s) { return s.state.angles.phi * kDeg; }},
      {"overlay_theta.svg", "Pitch",
       [](const TraceSample& s) { return s.state.angles.theta * kDeg; }},
      {"overlay_psi.svg", "Yaw", [](const TraceSample& s) { return s.state.angles.psi * kDeg; }},
  };
  for (const auto& o : overlays) {
    const auto yb = column(base, o.pick);
    const auto yc = column(cand, o.pick);
    write_text_atomic(out / o.file,
                      chart::render_line_chart(o.title, "t [s]",
                                               std::string(o.title) == "Altitude" ? "z [m]"
                                                                                  : "angle [deg]",
                                               {{"base", &tb, &yb}, {"candidate", &tc, &yc}}));
  }

  Manifest m;
  m.add("command", "compare");
  m.add("version", kVersion);
  m.add("base", fs::absolute(base_path).string());
  m.add("candidate", fs::absolute(cand_path).string());
  m.add("outputs",
        "report.txt,report.csv,overlay_z.svg,overlay_phi.svg,overlay_theta.svg,overlay_psi.svg");
  write_text_atomic(out / "manifest.txt", m.str());
  return 0;
}

int cmd_estimate_inertia(const std::string& meas_path, const std::string& config,
                         const std::string& out_dir) {
  const ParamSet set = load_set(config);
  const InertiaMeasurements meas = load_measurements(meas_path);

  const struct {
    const char* name;
    const BifilarMeasurement* m;
    double configured;
  } axes[] = {{"ixx", &meas.x, set.quad.ixx},
              {"iyy", &meas.y, set.quad.iyy},
              {"izz", &meas.z, set.quad.izz}};

  std::ostringstream text;
  for (const auto& ax : axes) {
    const double est = bifilar_inertia(*ax.m);
    const double dev = (est - ax.configured) / ax.configured * 100.0;
    text << ax.name << " = " << fmt(est, "%.6g") << " kg m^2  (configured "
         << fmt(ax.configured, "%.6g") << ", deviation " << fmt(dev, "%+.2f") << "%)\n";
  }

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_text_atomic(out / "inertia.txt", text.str());
  std::cout << text.str();

  Manifest m;
  m.add("command", "estimate-inertia");
  m.add("version", kVersion);
  m.add("measurements", fs::absolute(meas_path).string());
  add_param_rows(m, set);
  m.add("outputs", "inertia.txt");
  write_text_atomic(out / "manifest.txt", m.str());
  return 0;
}

int cmd_replay(const std::string& manifest_path, std::string out_dir) {
  const KeyValueFile kv = KeyValueFile::load(manifest_path);
  if (out_dir.empty()) out_dir = fs::absolute(manifest_path).parent_path().string();
  const std::string command = kv.text("command", "");

  // Manifests reuse the config key names, so they parse as plain configs.
  if (command == "open-loop") {
    return cmd_open_loop(manifest_path, out_dir, kv.number("dt", 0.01));
  }
  if (command == "closed-loop") {
    return cmd_closed_loop(manifest_path, out_dir, kv.text("controller", "pd"), "custom",
                           kv.text("alt_model", ""), kv.text("att_model", ""));
  }
  if (command == "train-anfis") {
    return cmd_train_anfis(manifest_path, out_dir,
                           static_cast<unsigned>(kv.number("seed", 42.0)));
  }
  if (command == "compare") {
    return cmd_compare(kv.text("base", ""), kv.text("candidate", ""), out_dir);
  }
  if (command == "estimate-inertia") {
    return cmd_estimate_inertia(kv.text("measurements", ""), manifest_path, out_dir);
  }
  std::cerr << "manifest has no recognizable command\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadcopter flight-dynamics simulator and control toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  double dt = 0.01;
  std::string controller = "pd", case_name = "sec54", alt_model, att_model;
  unsigned seed = 42;
  std::string base_trace, cand_trace, meas_path, manifest_path;

  CLI::App* open_cmd = app.add_subcommand("open-loop", "Staged open-loop rotor excitation");
  open_cmd->add_option("--config", config, "key = value config (or $QUADSIM_CONFIG)");
  open_cmd->add_option("--out", out_dir, "output directory");
  open_cmd->add_option("--dt", dt, "sample period [s]");

  CLI::App* closed_cmd = app.add_subcommand("closed-loop", "Hover regulation scenario");
  closed_cmd->add_option("--config", config, "key = value config (or $QUADSIM_CONFIG)");
  closed_cmd->add_option("--out", out_dir, "output directory");
  closed_cmd->add_option("--controller", controller, "pd | fuzzy")->required();
  closed_cmd->add_option("--case", case_name, "sec54 | case1 | case2 | custom");
  closed_cmd->add_option("--alt-model", alt_model, "altitude fuzzy model file");
  closed_cmd->add_option("--att-model", att_model, "attitude fuzzy model file");

  CLI::App* train_cmd = app.add_subcommand("train-anfis", "Train fuzzy controllers from PD data");
  train_cmd->add_option("--config", config, "key = value config (or $QUADSIM_CONFIG)");
  train_cmd->add_option("--out", out_dir, "output directory");
  train_cmd->add_option("--seed", seed, "battery jitter / holdout split seed");

  CLI::App* compare_cmd = app.add_subcommand("compare", "Compare two trace CSVs");
  compare_cmd->add_option("base", base_trace, "baseline trace CSV")->required();
  compare_cmd->add_option("candidate", cand_trace, "candidate trace CSV")->required();
  compare_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* estimate_cmd =
      app.add_subcommand("estimate-inertia", "Bifilar-pendulum inertia estimate");
  estimate_cmd->add_option("measurements", meas_path, "measurement key = value file")->required();
  estimate_cmd->add_option("--config", config, "params to compare against");
  estimate_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay_cmd->add_option("manifest", manifest_path, "manifest.txt from a previous run")
      ->required();
  replay_cmd->add_option("--out", out_dir, "output directory (default: manifest directory)");
  std::string replay_out;
  replay_cmd->callback([&] { replay_out = replay_cmd->count("--out") ? out_dir : ""; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (open_cmd->parsed()) return cmd_open_loop(effective_config(config), out_dir, dt);
    if (closed_cmd->parsed()) {
      return cmd_closed_loop(effective_config(config), out_dir, controller, case_name, alt_model,
                             att_model);
    }
    if (train_cmd->parsed()) return cmd_train_anfis(effective_config(config), out_dir, seed);
    if (compare_cmd->parsed()) return cmd_compare(base_trace, cand_trace, out_dir);
    if (estimate_cmd->parsed()) {
      return cmd_estimate_inertia(meas_path, effective_config(config), out_dir);
    }
    if (replay_cmd->parsed()) return cmd_replay(manifest_path, replay_out);
  } catch (const SingularLsq& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: widen the training battery so error and error-rate vary "
                 "independently\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const OutOfWindow& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
