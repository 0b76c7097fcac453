#include "quadsim/dynamics.hpp"

#include <cmath>

#include "quadsim/frames.hpp"

namespace quadsim {

void QuadParams::validate() const {
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  if (!(gravity > 0.0)) throw ValidationError("gravity must be positive");
  if (!(arm_length > 0.0)) throw ValidationError("arm_length must be positive");
  if (!(ixx > 0.0)) throw ValidationError("ixx must be positive");
  if (!(iyy > 0.0)) throw ValidationError("iyy must be positive");
  if (!(izz > 0.0)) throw ValidationError("izz must be positive");
  if (!(thrust_coeff > 0.0)) throw ValidationError("ct must be positive");
  if (!(drag_coeff > 0.0)) throw ValidationError("cd must be positive");
}

double thrust_force(const RotorSpeeds& s, const QuadParams& p) {
  return p.thrust_coeff * (s.w1 * s.w1 + s.w2 * s.w2 + s.w3 * s.w3 + s.w4 * s.w4);
}

Vec3 rotor_torques(const RotorSpeeds& s, const QuadParams& p) {
  const double w1sq = s.w1 * s.w1, w2sq = s.w2 * s.w2;
  const double w3sq = s.w3 * s.w3, w4sq = s.w4 * s.w4;
  return {p.arm_length * p.thrust_coeff * (w1sq - w2sq - w3sq + w4sq),
          p.arm_length * p.thrust_coeff * (w1sq + w2sq - w3sq - w4sq),
          p.drag_coeff * (w1sq - w2sq + w3sq - w4sq)};
}

StateDerivative state_derivative(const QuadState& x, const RotorSpeeds& speeds,
                                 const QuadParams& params) {
  const double f_over_m = thrust_force(speeds, params) / params.mass;
  const double cphi = std::cos(x.angles.phi), sphi = std::sin(x.angles.phi);
  const double cth = std::cos(x.angles.theta), sth = std::sin(x.angles.theta);
  const double cpsi = std::cos(x.angles.psi), spsi = std::sin(x.angles.psi);

  StateDerivative d;
  d.d_position = x.velocity;
  d.d_velocity = {f_over_m * (cpsi * sth * cphi + spsi * sphi),
                  f_over_m * (spsi * sth * cphi - cpsi * sphi),
                  f_over_m * (cth * cphi) - params.gravity};
  d.d_angles = body_rates_to_euler_rates(x.angles, x.rates);

  const Vec3 tau = rotor_torques(speeds, params);
  const double p = x.rates.p, q = x.rates.q, r = x.rates.r;
  d.d_rates = {(params.iyy - params.izz) * q * r / params.ixx + tau.x() / params.ixx,
               (params.izz - params.ixx) * p * r / params.iyy + tau.y() / params.iyy,
               (params.ixx - params.iyy) * p * q / params.izz + tau.z() / params.izz};
  return d;
}

namespace {

QuadState add_scaled(const QuadState& x, const StateDerivative& d, double h) {
  QuadState out = x;
  out.position += h * d.d_position;
  out.velocity += h * d.d_velocity;
  out.angles.phi += h * d.d_angles.x();
  out.angles.theta += h * d.d_angles.y();
  out.angles.psi += h * d.d_angles.z();
  out.rates.p += h * d.d_rates.x();
  out.rates.q += h * d.d_rates.y();
  out.rates.r += h * d.d_rates.z();
  return out;
}

StateDerivative combine_rk4(const StateDerivative& k1, const StateDerivative& k2,
                            const StateDerivative& k3, const StateDerivative& k4) {
  StateDerivative d;
  d.d_position = (k1.d_position + 2.0 * k2.d_position + 2.0 * k3.d_position + k4.d_position) / 6.0;
  d.d_velocity = (k1.d_velocity + 2.0 * k2.d_velocity + 2.0 * k3.d_velocity + k4.d_velocity) / 6.0;
  d.d_angles = (k1.d_angles + 2.0 * k2.d_angles + 2.0 * k3.d_angles + k4.d_angles) / 6.0;
  d.d_rates = (k1.d_rates + 2.0 * k2.d_rates + 2.0 * k3.d_rates + k4.d_rates) / 6.0;
  return d;
}

}  // namespace

QuadState step_rk4(const QuadState& x, const RotorSpeeds& speeds, double dt,
                   const QuadParams& params) {
  const StateDerivative k1 = state_derivative(x, speeds, params);
  const StateDerivative k2 = state_derivative(add_scaled(x, k1, dt / 2.0), speeds, params);
  const StateDerivative k3 = state_derivative(add_scaled(x, k2, dt / 2.0), speeds, params);
  const StateDerivative k4 = state_derivative(add_scaled(x, k3, dt), speeds, params);
  return add_scaled(x, combine_rk4(k1, k2, k3, k4), dt);
}

QuadState step_rk4(const QuadState& x, const std::function<RotorSpeeds(double)>& speeds_at,
                   double t, double dt, const QuadParams& params) {
  const RotorSpeeds s0 = speeds_at(t);
  const RotorSpeeds sh = speeds_at(t + dt / 2.0);
  const RotorSpeeds s1 = speeds_at(t + dt);
  const StateDerivative k1 = state_derivative(x, s0, params);
  const StateDerivative k2 = state_derivative(add_scaled(x, k1, dt / 2.0), sh, params);
  const StateDerivative k3 = state_derivative(add_scaled(x, k2, dt / 2.0), sh, params);
  const StateDerivative k4 = state_derivative(add_scaled(x, k3, dt), s1, params);
  return add_scaled(x, combine_rk4(k1, k2, k3, k4), dt);
}

QuadState step_euler(const QuadState& x, const RotorSpeeds& speeds, double dt,
                     const QuadParams& params) {
  return add_scaled(x, state_derivative(x, speeds, params), dt);
}

}  // namespace quadsim
