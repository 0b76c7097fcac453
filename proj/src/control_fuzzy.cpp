#include "quadsim/control_fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace quadsim {

namespace {

constexpr double kFiringFloor = 1e-12;

double rms(const std::vector<double>& residuals) {
  double acc = 0.0;
  for (double r : residuals) acc += r * r;
  return std::sqrt(acc / static_cast<double>(residuals.size()));
}

}  // namespace

double BellMf::eval(double x) const {
  const double t = std::abs((x - center) / width);
  return 1.0 / (1.0 + std::pow(t, 2.0 * shape));
}

std::vector<double> rule_firing(const SugenoFis& fis, double error, double error_rate) {
  const std::size_t n1 = fis.input1_mfs.size(), n2 = fis.input2_mfs.size();
  std::vector<double> mu1(n1), mu2(n2);
  for (std::size_t i = 0; i < n1; ++i) mu1[i] = fis.input1_mfs[i].eval(error);
  for (std::size_t j = 0; j < n2; ++j) mu2[j] = fis.input2_mfs[j].eval(error_rate);

  std::vector<double> w(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) w[i * n2 + j] = mu1[i] * mu2[j];
  return w;
}

double SugenoFis::evaluate(double error, double error_rate) const {
  const std::vector<double> w = rule_firing(*this, error, error_rate);
  double total = 0.0, blended = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const RuleConsequent& c = consequents[k];
    blended += w[k] * (c.p * error + c.q * error_rate + c.r);
    total += w[k];
  }
  if (total < kFiringFloor) {
    throw DegenerateFiring("fis evaluate: total firing strength " + std::to_string(total) +
                           " below threshold at inputs (" + std::to_string(error) + ", " +
                           std::to_string(error_rate) + ")");
  }
  return blended / total;
}

namespace {

std::vector<BellMf> uniform_mf_family(double lo, double hi, int count) {
  const double spacing = (hi - lo) / static_cast<double>(count - 1);
  std::vector<BellMf> family(count);
  for (int i = 0; i < count; ++i) {
    family[i].center = lo + spacing * i;
    family[i].width = spacing / 2.0;
    family[i].shape = 2.0;
  }
  return family;
}

}  // namespace

SugenoFis anfis_init(const TrainingDataset& data) {
  if (data.rows.empty()) throw InvalidRange("anfis_init: empty dataset");

  double e_lo = data.rows.front().error, e_hi = e_lo;
  double r_lo = data.rows.front().error_rate, r_hi = r_lo;
  for (const TrainingSample& s : data.rows) {
    e_lo = std::min(e_lo, s.error);
    e_hi = std::max(e_hi, s.error);
    r_lo = std::min(r_lo, s.error_rate);
    r_hi = std::max(r_hi, s.error_rate);
  }
  if (e_hi - e_lo < 1e-12) throw InvalidRange("anfis_init: error column has no spread");
  if (r_hi - r_lo < 1e-12) throw InvalidRange("anfis_init: error-rate column has no spread");

  SugenoFis fis;
  fis.input1_min = e_lo;
  fis.input1_max = e_hi;
  fis.input2_min = r_lo;
  fis.input2_max = r_hi;
  fis.input1_mfs = uniform_mf_family(e_lo, e_hi, 5);
  fis.input2_mfs = uniform_mf_family(r_lo, r_hi, 5);
  fis.consequents.assign(25, RuleConsequent{});
  return fis;
}

namespace {

/// Exact least squares on the consequents with premises frozen.
void fit_consequents(SugenoFis& fis, const std::vector<const TrainingSample*>& rows) {
  const std::size_t n_rules = fis.consequents.size();
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

  // A plane cannot be pinned by inputs confined to a line or a point.
  Eigen::MatrixXd basis(n, 3);
  for (Eigen::Index k = 0; k < n; ++k)
    basis.row(k) << rows[k]->error, rows[k]->error_rate, 1.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < 3) {
    throw SingularLsq("consequent fit: inputs are collinear, need two-dimensional coverage");
  }

  Eigen::MatrixXd regressor(n, static_cast<Eigen::Index>(3 * n_rules));
  Eigen::VectorXd target(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const TrainingSample& s = *rows[k];
    const std::vector<double> w = rule_firing(fis, s.error, s.error_rate);
    double total = 0.0;
    for (double wk : w) total += wk;
    if (total < kFiringFloor) total = kFiringFloor;
    for (std::size_t rule = 0; rule < n_rules; ++rule) {
      const double wn = w[rule] / total;
      regressor(k, static_cast<Eigen::Index>(3 * rule)) = wn * s.error;
      regressor(k, static_cast<Eigen::Index>(3 * rule + 1)) = wn * s.error_rate;
      regressor(k, static_cast<Eigen::Index>(3 * rule + 2)) = wn;
    }
    target(k) = s.target;
  }

  // Minimum-norm solution keeps rarely-firing rules tame instead of letting
  // ill-conditioned columns blow up their consequents.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(regressor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd solution = svd.solve(target);
  for (std::size_t rule = 0; rule < n_rules; ++rule) {
    fis.consequents[rule].p = solution(static_cast<Eigen::Index>(3 * rule));
    fis.consequents[rule].q = solution(static_cast<Eigen::Index>(3 * rule + 1));
    fis.consequents[rule].r = solution(static_cast<Eigen::Index>(3 * rule + 2));
  }
}

double dataset_rmse(const SugenoFis& fis, const std::vector<const TrainingSample*>& rows) {
  std::vector<double> residuals;
  residuals.reserve(rows.size());
  for (const TrainingSample* s : rows)
    residuals.push_back(fis.evaluate(s->error, s->error_rate) - s->target);
  return rms(residuals);
}

struct MfGradient {
  double d_width = 0.0;
  double d_shape = 0.0;
  double d_center = 0.0;
};

/// d mu / d(a, b, c) of the generalized bell at x.
MfGradient bell_gradient(const BellMf& mf, double x) {
  MfGradient g;
  const double t = std::abs((x - mf.center) / mf.width);
  if (t < 1e-300) return g;
  const double powered = std::pow(t, 2.0 * mf.shape);
  const double mu = 1.0 / (1.0 + powered);
  const double common = powered * mu * mu;
  g.d_width = 2.0 * mf.shape * common / mf.width;
  g.d_shape = -2.0 * std::log(t) * common;
  g.d_center = 2.0 * mf.shape * common / (x - mf.center);
  return g;
}

std::vector<double> premise_gradient_rows(const SugenoFis& fis,
                                          const std::vector<const TrainingSample*>& rows) {
  const std::size_t n1 = fis.input1_mfs.size(), n2 = fis.input2_mfs.size();
  std::vector<double> grad(3 * (n1 + n2), 0.0);

  std::vector<double> mu1(n1), mu2(n2);
  for (const TrainingSample* sample : rows) {
    const double e = sample->error, edot = sample->error_rate;
    for (std::size_t i = 0; i < n1; ++i) mu1[i] = fis.input1_mfs[i].eval(e);
    for (std::size_t j = 0; j < n2; ++j) mu2[j] = fis.input2_mfs[j].eval(edot);

    double total = 0.0, blended = 0.0;
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < n2; ++j) {
        const RuleConsequent& c = fis.consequents[i * n2 + j];
        const double f = c.p * e + c.q * edot + c.r;
        const double w = mu1[i] * mu2[j];
        total += w;
        blended += w * f;
      }
    }
    if (total < kFiringFloor) continue;
    const double output = blended / total;
    const double residual = output - sample->target;

    for (std::size_t i = 0; i < n1; ++i) {
      // d output / d mu1[i] = sum_j (f_ij - output) mu2[j] / total
      double d_out = 0.0;
      for (std::size_t j = 0; j < n2; ++j) {
        const RuleConsequent& c = fis.consequents[i * n2 + j];
        const double f = c.p * e + c.q * edot + c.r;
        d_out += (f - output) * mu2[j];
      }
      d_out /= total;
      const MfGradient g = bell_gradient(fis.input1_mfs[i], e);
      grad[3 * i + 0] += residual * d_out * g.d_width;
      grad[3 * i + 1] += residual * d_out * g.d_shape;
      grad[3 * i + 2] += residual * d_out * g.d_center;
    }
    for (std::size_t j = 0; j < n2; ++j) {
      double d_out = 0.0;
      for (std::size_t i = 0; i < n1; ++i) {
        const RuleConsequent& c = fis.consequents[i * n2 + j];
        const double f = c.p * e + c.q * edot + c.r;
        d_out += (f - output) * mu1[i];
      }
      d_out /= total;
      const MfGradient g = bell_gradient(fis.input2_mfs[j], edot);
      const std::size_t base = 3 * (n1 + j);
      grad[base + 0] += residual * d_out * g.d_width;
      grad[base + 1] += residual * d_out * g.d_shape;
      grad[base + 2] += residual * d_out * g.d_center;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= inv_n;
  return grad;
}

void apply_premise_step(SugenoFis& fis, const std::vector<double>& grad, double lr) {
  const std::size_t n1 = fis.input1_mfs.size();
  const double span1 = fis.input1_max - fis.input1_min;
  const double span2 = fis.input2_max - fis.input2_min;

  auto update_family = [lr](std::vector<BellMf>& family, const std::vector<double>& g,
                            std::size_t offset, double span) {
    for (std::size_t k = 0; k < family.size(); ++k) {
      BellMf& mf = family[k];
      mf.width -= lr * g[offset + 3 * k + 0];
      mf.shape -= lr * g[offset + 3 * k + 1];
      mf.center -= lr * g[offset + 3 * k + 2];
      mf.width = std::max(mf.width, 1e-4 * span);
      mf.shape = std::clamp(mf.shape, 0.5, 8.0);
    }
    // Keep the centers strictly ascending so rule identity is stable.
    for (std::size_t k = 1; k < family.size(); ++k) {
      const double floor = family[k - 1].center + 1e-6 * span;
      family[k].center = std::max(family[k].center, floor);
    }
  };
  update_family(fis.input1_mfs, grad, 0, span1);
  update_family(fis.input2_mfs, grad, 3 * n1, span2);
}

std::vector<const TrainingSample*> to_pointers(const TrainingDataset& data) {
  std::vector<const TrainingSample*> rows;
  rows.reserve(data.rows.size());
  for (const TrainingSample& s : data.rows) rows.push_back(&s);
  return rows;
}

}  // namespace

std::vector<double> premise_gradient(const SugenoFis& fis, const TrainingDataset& data) {
  return premise_gradient_rows(fis, to_pointers(data));
}

TrainReport anfis_train(SugenoFis& fis, const TrainingDataset& data, const TrainConfig& config) {
  if (data.rows.empty()) throw SingularLsq("anfis_train: empty dataset");
  if (config.epochs < 1) throw ValidationError("epochs must be at least 1");

  // Deterministic Fisher-Yates shuffle for the train/holdout split.
  std::vector<std::size_t> order(data.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937 rng(config.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = rng() % (i + 1);
    std::swap(order[i], order[j]);
  }
  std::size_t n_holdout = static_cast<std::size_t>(
      std::lround(config.holdout * static_cast<double>(order.size())));
  if (n_holdout + 1 > order.size()) n_holdout = order.size() - 1;

  std::vector<const TrainingSample*> train, holdout;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TrainingSample* s = &data.rows[order[i]];
    if (i < n_holdout) holdout.push_back(s);
    else train.push_back(s);
  }

  TrainReport report;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    report.rmse_before_lsq.push_back(dataset_rmse(fis, train));
    fit_consequents(fis, train);
    report.rmse_history.push_back(dataset_rmse(fis, train));

    // The last epoch ends on the least-squares substep so the shipped
    // consequents are exactly optimal for the shipped premises.
    if (epoch + 1 < config.epochs) {
      const std::vector<double> grad = premise_gradient_rows(fis, train);
      apply_premise_step(fis, grad, config.learning_rate);
    }
  }
  report.holdout_rmse = dataset_rmse(fis, holdout.empty() ? train : holdout);
  return report;
}

TeacherBattery default_training_battery(unsigned seed) {
  std::mt19937 rng(seed);
  auto jitter = [&rng](double v) {
    const double u = static_cast<double>(rng()) / 4294967295.0 * 2.0 - 1.0;
    return v * (1.0 + 0.02 * u);
  };
  const double deg = std::numbers::pi / 180.0;

  TeacherBattery battery;
  battery.dt = 0.01;
  // The first few samples carry the derivative-filter transient; logging them
  // would teach the surface a spurious near-vertical gain along zero rate.
  battery.skip_initial_steps = 5;

  // Trajectories alone hug the regulation manifold, leaving rule corners
  // unanchored, so launches cover all four (value, rate) quadrants too.
  auto make_altitude = [&](double z0, double vz0) {
    TeacherScenario s;
    s.initial.position.z() = (z0 == 0.0) ? 0.0 : jitter(z0);
    s.initial.velocity.z() = (vz0 == 0.0) ? 0.0 : jitter(vz0);
    s.channel = ControlAxis::kAltitude;
    battery.scenarios.push_back(s);
  };
  for (double z0 : {-2.0, -1.2, -0.5, 0.5, 1.2, 2.0}) make_altitude(z0, 0.0);
  for (double vz0 : {-2.0, -1.0, 1.0, 2.0}) make_altitude(0.0, vz0);
  for (double z0 : {-2.0, -1.0, 1.0, 2.0}) {
    for (double vz0 : {-2.0, -1.0, 1.0, 2.0}) make_altitude(z0, vz0);
  }
  make_altitude(1.5, -1.5);
  make_altitude(-1.5, 1.5);

  const ControlAxis axes[] = {ControlAxis::kRoll, ControlAxis::kPitch, ControlAxis::kYaw};
  for (ControlAxis axis : axes) {
    auto make = [&](double angle_deg, double rate) {
      TeacherScenario s;
      s.channel = axis;
      double* angle = (axis == ControlAxis::kRoll)    ? &s.initial.angles.phi
                      : (axis == ControlAxis::kPitch) ? &s.initial.angles.theta
                                                      : &s.initial.angles.psi;
      double* body_rate = (axis == ControlAxis::kRoll)    ? &s.initial.rates.p
                          : (axis == ControlAxis::kPitch) ? &s.initial.rates.q
                                                          : &s.initial.rates.r;
      *angle = (angle_deg == 0.0) ? 0.0 : jitter(angle_deg) * deg;
      *body_rate = (rate == 0.0) ? 0.0 : jitter(rate);
      battery.scenarios.push_back(s);
    };
    for (double a : {-70.0, -45.0, -20.0, 20.0, 45.0, 70.0}) make(a, 0.0);
    // Rates beyond ~1 rad/s tumble the airframe under these soft gains.
    for (double r : {-0.6, -0.3, 0.3, 0.6}) make(0.0, r);
    for (double a : {-60.0, -30.0, 30.0, 60.0}) {
      for (double r : {-0.6, 0.6}) make(a, r);
    }
  }
  return battery;
}

TeacherData generate_training_data(const TeacherBattery& battery, const QuadParams& params,
                                   const PdGains& altitude_gains, const PdGains& attitude_gains,
                                   const SpeedLimits& limits) {
  TeacherData data;
  const double dt = battery.dt;

  int scenario_index = 0;
  for (const TeacherScenario& scenario : battery.scenarios) {
    PdController alt(altitude_gains, dt);
    PdController roll(attitude_gains, dt), pitch(attitude_gains, dt), yaw(attitude_gains, dt);

    QuadState x = scenario.initial;
    const int steps = static_cast<int>(std::lround(scenario.duration / dt));
    std::array<double, 4> prev_error{};
    try {
      for (int k = 0; k < steps; ++k) {
        const std::array<double, 4> error = {-x.position.z(), -x.angles.phi,
                                             -x.angles.theta, -x.angles.psi};
        std::array<double, 4> error_rate{};
        if (k > 0)
          for (int i = 0; i < 4; ++i) error_rate[i] = (error[i] - prev_error[i]) / dt;
        prev_error = error;

        ControlVector u;
        u.thrust = altitude_control(alt, 0.0, x.position.z(), params);
        u.tau_phi = attitude_control(roll, 0.0, x.angles.phi);
        u.tau_theta = attitude_control(pitch, 0.0, x.angles.theta);
        u.tau_psi = attitude_control(yaw, 0.0, x.angles.psi);

        const MixResult mixed = mix(u, params, limits);
        const ControlVector realized = speeds_to_controls(mixed.speeds, params);

        if (k >= battery.skip_initial_steps) {
          switch (scenario.channel) {
            case ControlAxis::kAltitude:
              data.altitude.rows.push_back(
                  {error[0], error_rate[0], realized.thrust - params.mass * params.gravity});
              break;
            case ControlAxis::kRoll:
              data.attitude.rows.push_back({error[1], error_rate[1], realized.tau_phi});
              break;
            case ControlAxis::kPitch:
              data.attitude.rows.push_back({error[2], error_rate[2], realized.tau_theta});
              break;
            case ControlAxis::kYaw:
              data.attitude.rows.push_back({error[3], error_rate[3], realized.tau_psi});
              break;
          }
        }

        x = step_rk4(x, mixed.speeds, dt, params);
        // Lateral drift is unregulated and feeds nothing back; watch only the
        // taught channels for runaway.
        const bool insane = std::abs(x.position.z()) > 50.0 || std::abs(x.velocity.z()) > 50.0 ||
                            std::abs(x.rates.p) > 50.0 || std::abs(x.rates.q) > 50.0 ||
                            std::abs(x.rates.r) > 50.0 || !std::isfinite(x.angles.phi) ||
                            !std::isfinite(x.angles.theta) || !std::isfinite(x.angles.psi);
        if (insane) {
          throw ScenarioDiverged("teacher scenario " + std::to_string(scenario_index) +
                                 " left the state envelope at t = " + std::to_string(k * dt));
        }
      }
    } catch (const SingularAttitude& err) {
      throw ScenarioDiverged("teacher scenario " + std::to_string(scenario_index) +
                             " hit the pitch singularity: " + err.what());
    }
    ++scenario_index;
  }
  return data;
}

double fuzzy_controller_step(const SugenoFis& model, double error, double error_rate,
                             ControlAxis axis, const QuadParams& params) {
  const double out = model.evaluate(error, error_rate);
  return (axis == ControlAxis::kAltitude) ? out + params.mass * params.gravity : out;
}

namespace {

void validate_model(const SugenoFis& fis) {
  if (fis.input1_mfs.size() != 5 || fis.input2_mfs.size() != 5 || fis.consequents.size() != 25) {
    throw ValidationError("model must carry 5 membership functions per input and 25 rules");
  }
  if (!(fis.input1_min < fis.input1_max) || !(fis.input2_min < fis.input2_max)) {
    throw ValidationError("input ranges must satisfy min < max");
  }
  for (const std::vector<BellMf>* family : {&fis.input1_mfs, &fis.input2_mfs}) {
    for (std::size_t k = 0; k < family->size(); ++k) {
      if (!((*family)[k].width > 0.0)) throw ValidationError("membership widths must be positive");
      if (k > 0 && !((*family)[k].center > (*family)[k - 1].center)) {
        throw ValidationError("membership centers must be strictly ascending");
      }
    }
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_fis(const SugenoFis& fis, const std::string& path) {
  validate_model(fis);
  std::ostringstream out;
  out << "quadsim-fis 1\n";
  out << "input1_range " << fmt17(fis.input1_min) << ' ' << fmt17(fis.input1_max) << '\n';
  out << "input2_range " << fmt17(fis.input2_min) << ' ' << fmt17(fis.input2_max) << '\n';
  for (int input = 1; input <= 2; ++input) {
    const std::vector<BellMf>& family = (input == 1) ? fis.input1_mfs : fis.input2_mfs;
    for (std::size_t k = 0; k < family.size(); ++k) {
      out << "mf " << input << ' ' << k << ' ' << fmt17(family[k].width) << ' '
          << fmt17(family[k].shape) << ' ' << fmt17(family[k].center) << '\n';
    }
  }
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const RuleConsequent& c = fis.consequents[i * 5 + j];
      out << "rule " << i << ' ' << j << ' ' << fmt17(c.p) << ' ' << fmt17(c.q) << ' '
          << fmt17(c.r) << '\n';
    }
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw ParseError("cannot open model file for writing: " + path);
  file << out.str();
}

SugenoFis load_fis(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open model file: " + path);

  SugenoFis fis;
  fis.input1_mfs.resize(5);
  fis.input2_mfs.resize(5);
  fis.consequents.resize(25);
  std::array<bool, 10> mf_seen{};
  std::array<bool, 25> rule_seen{};
  bool header = false, range1 = false, range2 = false;

  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string tag;
    in >> tag;
    const std::string where = "model file line " + std::to_string(line_no);

    if (tag == "quadsim-fis") {
      int version = 0;
      if (!(in >> version) || version != 1) throw ParseError(where + ": unsupported version");
      header = true;
    } else if (tag == "input1_range") {
      if (!(in >> fis.input1_min >> fis.input1_max)) throw ParseError(where + ": bad range");
      range1 = true;
    } else if (tag == "input2_range") {
      if (!(in >> fis.input2_min >> fis.input2_max)) throw ParseError(where + ": bad range");
      range2 = true;
    } else if (tag == "mf") {
      int input = 0, index = 0;
      BellMf mf;
      if (!(in >> input >> index >> mf.width >> mf.shape >> mf.center) || input < 1 ||
          input > 2 || index < 0 || index > 4) {
        throw ParseError(where + ": bad membership record");
      }
      (input == 1 ? fis.input1_mfs : fis.input2_mfs)[index] = mf;
      mf_seen[(input - 1) * 5 + index] = true;
    } else if (tag == "rule") {
      int i = 0, j = 0;
      RuleConsequent c;
      if (!(in >> i >> j >> c.p >> c.q >> c.r) || i < 0 || i > 4 || j < 0 || j > 4) {
        throw ParseError(where + ": bad rule record");
      }
      fis.consequents[i * 5 + j] = c;
      rule_seen[i * 5 + j] = true;
    } else {
      throw ParseError(where + ": unknown record '" + tag + "'");
    }
  }

  if (!header) throw ParseError("model file: missing quadsim-fis header");
  if (!range1 || !range2) throw ParseError("model file: missing input range records");
  for (bool seen : mf_seen)
    if (!seen) throw ParseError("model file: missing membership records");
  for (bool seen : rule_seen)
    if (!seen) throw ParseError("model file: missing rule records");

  validate_model(fis);
  return fis;
}

}  // namespace quadsim
