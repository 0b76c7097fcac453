#include "quadsim/actuation.hpp"

#include <cmath>

namespace quadsim {

MixResult mix(const ControlVector& u, const QuadParams& p, const SpeedLimits& limits) {
  const double a = u.thrust / (4.0 * p.thrust_coeff);
  const double b = u.tau_phi / (4.0 * p.arm_length * p.thrust_coeff);
  const double c = u.tau_theta / (4.0 * p.arm_length * p.thrust_coeff);
  const double d = u.tau_psi / (4.0 * p.drag_coeff);

  const std::array<double, 4> squared = {a + b + c + d,
                                         a - b + c - d,
                                         a - b - c + d,
                                         a + b - c - d};
  MixResult out;
  const double min_sq = limits.w_min * limits.w_min;
  for (int i = 0; i < 4; ++i) {
    double wsq = squared[i];
    if (wsq < min_sq) {
      wsq = min_sq;
      out.saturated[i] = true;
    }
    double w = std::sqrt(wsq);
    if (w > limits.w_max) {
      w = limits.w_max;
      out.saturated[i] = true;
    }
    out.speeds[i] = w;
  }
  return out;
}

ControlVector speeds_to_controls(const RotorSpeeds& s, const QuadParams& p) {
  const Vec3 tau = rotor_torques(s, p);
  return {thrust_force(s, p), tau.x(), tau.y(), tau.z()};
}

double pwm_from_speed(double speed, const SpeedLimits& limits) {
  return 1000.0 + 1000.0 * (speed - limits.w_min) / (limits.w_max - limits.w_min);
}

}  // namespace quadsim
