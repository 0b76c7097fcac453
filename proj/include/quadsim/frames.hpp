#pragma once

#include "quadsim/types.hpp"

namespace quadsim {

/// Margin around |theta| = pi/2 inside which Euler kinematics are rejected.
inline constexpr double kPitchSingularityMargin = 1e-6;

/// Body-to-world rotation R = Rz(psi) Ry(theta) Rx(phi).
Mat3 rotation_body_to_world(const EulerAngles& angles);

/// World-to-body rotation, transpose of rotation_body_to_world.
Mat3 world_to_body(const EulerAngles& angles);

/// Matrix mapping body rates (p, q, r) to Euler-angle rates.
/// Throws SingularAttitude when |theta| is within the guard band of pi/2.
Mat3 euler_rate_matrix(const EulerAngles& angles);

/// Euler-angle rates (phi_dot, theta_dot, psi_dot) for given body rates.
Vec3 body_rates_to_euler_rates(const EulerAngles& angles, const BodyRates& rates);

}  // namespace quadsim
