#include "quadsim/control_linear.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim {

PdController::PdController(const PdGains& gains, double dt) : gains_(gains), dt_(dt) {
  // Tustin transform of kd N s / (s + N):
  //   y[k] = pole * y[k-1] + diff_gain * (e[k] - e[k-1])
  const double two_over_dt = 2.0 / dt_;
  pole_ = (two_over_dt - gains_.filter_coeff) / (two_over_dt + gains_.filter_coeff);
  diff_gain_ = 2.0 * gains_.kd * gains_.filter_coeff / (2.0 + gains_.filter_coeff * dt_);
}

double PdController::step(double error) {
  const double derivative = pole_ * prev_derivative_ + diff_gain_ * (error - prev_error_);
  prev_derivative_ = derivative;
  prev_error_ = error;
  return gains_.kp * error + derivative;
}

void PdController::reset() {
  prev_error_ = 0.0;
  prev_derivative_ = 0.0;
}

double hover_speed(const QuadParams& p) {
  return std::sqrt(p.mass * p.gravity / (4.0 * p.thrust_coeff));
}

double altitude_control(PdController& pd, double z_desired, double z_actual,
                        const QuadParams& params) {
  return pd.step(z_desired - z_actual) + params.mass * params.gravity;
}

double attitude_control(PdController& pd, double desired, double actual) {
  return pd.step(desired - actual);
}

LinearPlants linear_plants(const QuadParams& p) {
  return {p.mass, p.ixx, p.iyy, p.izz};
}

LinearLoopTrace simulate_linear_closed_loop(double plant_constant, const PdGains& gains,
                                            ReferenceKind kind, double duration, double dt) {
  PdController pd(gains, dt);
  const int steps = static_cast<int>(std::lround(duration / dt));

  LinearLoopTrace trace;
  trace.dt = dt;
  trace.reference.reserve(steps + 1);
  trace.output.reserve(steps + 1);

  double pos = 0.0, vel = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const double ref = (kind == ReferenceKind::kStep) ? 1.0 : t;
    trace.reference.push_back(ref);
    trace.output.push_back(pos);

    const double u = pd.step(ref - pos);
    // Exact ZOH discretization of the double integrator K x'' = u.
    pos += dt * vel + dt * dt / (2.0 * plant_constant) * u;
    vel += dt / plant_constant * u;
  }
  return trace;
}

StepMetrics step_metrics(const std::vector<double>& y, double dt, double reference) {
  StepMetrics m;
  const double lo = 0.1 * reference, hi = 0.9 * reference;

  double t_lo = -1.0, t_hi = -1.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (t_lo < 0.0 && y[k] >= lo) t_lo = k * dt;
    if (t_hi < 0.0 && y[k] >= hi) t_hi = k * dt;
    if (t_hi >= 0.0) break;
  }
  if (t_lo < 0.0 || t_hi < 0.0) throw NoSettle("step_metrics: response never reaches 90% level");
  m.rise_time = t_hi - t_lo;

  m.peak = *std::max_element(y.begin(), y.end());
  m.overshoot_percent = std::max(0.0, (m.peak - reference) / reference * 100.0);

  const double band = 0.02 * std::abs(reference);
  std::size_t last_outside = 0;
  bool any_outside = false;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (std::abs(y[k] - reference) > band) {
      last_outside = k;
      any_outside = true;
    }
  }
  if (any_outside && last_outside + 1 >= y.size()) {
    throw NoSettle("step_metrics: response still outside the 2% band at the end of the trace");
  }
  m.settling_time = any_outside ? (last_outside + 1) * dt : 0.0;
  return m;
}

LinearityGaps check_affine_not_linear(const QuadParams& params, double u, double v, double c) {
  const auto f = [&](double force) { return force / params.mass - params.gravity; };
  return {f(u + v) - (f(u) + f(v)), f(c * v) - c * f(v)};
}

double steady_state_error(double plant_constant, const PdGains& gains, ReferenceKind kind,
                          double horizon, double dt) {
  const LinearLoopTrace trace = simulate_linear_closed_loop(plant_constant, gains, kind, horizon, dt);
  const double final_error = std::abs(trace.reference.back() - trace.output.back());
  // A loop this slow to converge has effectively diverged.
  if (final_error > std::abs(trace.reference.back()) + 10.0) {
    throw NoSettle("steady_state_error: loop diverged");
  }
  return final_error;
}

}  // namespace quadsim
