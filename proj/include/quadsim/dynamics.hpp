#pragma once

#include <functional>

#include "quadsim/types.hpp"

namespace quadsim {

/// Physical parameters of the vehicle. Defaults are the reference airframe
/// (0.9 kg, 0.21 m arms, rotor coefficients identified in rpm units).
struct QuadParams {
  double mass = 0.9;              // kg
  double gravity = 9.81;          // m/s^2
  double arm_length = 0.21;       // m, rotor hub to center
  double ixx = 1.467e-2;          // kg m^2
  double iyy = 1.667e-2;          // kg m^2
  double izz = 1.325e-2;          // kg m^2
  double thrust_coeff = 4.980e-8; // N / rpm^2, per rotor
  double drag_coeff = 5.804e-9;   // N m / rpm^2, per rotor

  /// Throws ValidationError naming the violated constraint.
  void validate() const;
};

/// Time derivative of QuadState, same layout.
struct StateDerivative {
  Vec3 d_position = Vec3::Zero();
  Vec3 d_velocity = Vec3::Zero();
  Vec3 d_angles = Vec3::Zero();   // (phi_dot, theta_dot, psi_dot)
  Vec3 d_rates = Vec3::Zero();    // (p_dot, q_dot, r_dot)
};

/// Total thrust F = Ct * sum(w_i^2) along body z.
double thrust_force(const RotorSpeeds& speeds, const QuadParams& params);

/// Body torques (tau_phi, tau_theta, tau_psi) from differential rotor speeds.
Vec3 rotor_torques(const RotorSpeeds& speeds, const QuadParams& params);

/// Full nonlinear right-hand side. Position never enters the derivative
/// (translational invariance). Throws SingularAttitude near |theta| = 90 deg.
StateDerivative state_derivative(const QuadState& state, const RotorSpeeds& speeds,
                                 const QuadParams& params);

/// Classical RK4 step with rotor speeds held constant (zero-order hold).
QuadState step_rk4(const QuadState& state, const RotorSpeeds& speeds, double dt,
                   const QuadParams& params);

/// RK4 step with speeds sampled at the stage times t, t+dt/2, t+dt.
/// Preserves 4th-order accuracy under smooth time-varying inputs.
QuadState step_rk4(const QuadState& state,
                   const std::function<RotorSpeeds(double)>& speeds_at, double t,
                   double dt, const QuadParams& params);

/// Explicit Euler step, offered for integrator comparisons.
QuadState step_euler(const QuadState& state, const RotorSpeeds& speeds, double dt,
                     const QuadParams& params);

}  // namespace quadsim
