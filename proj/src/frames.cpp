#include "quadsim/frames.hpp"

#include <cmath>
#include <numbers>

namespace quadsim {

Mat3 rotation_body_to_world(const EulerAngles& angles) {
  const double cphi = std::cos(angles.phi), sphi = std::sin(angles.phi);
  const double cth = std::cos(angles.theta), sth = std::sin(angles.theta);
  const double cpsi = std::cos(angles.psi), spsi = std::sin(angles.psi);

  Mat3 r;
  r << cpsi * cth, cpsi * sth * sphi - spsi * cphi, cpsi * sth * cphi + spsi * sphi,
       spsi * cth, spsi * sth * sphi + cpsi * cphi, spsi * sth * cphi - cpsi * sphi,
       -sth,       cth * sphi,                      cth * cphi;
  return r;
}

Mat3 world_to_body(const EulerAngles& angles) {
  return rotation_body_to_world(angles).transpose();
}

Mat3 euler_rate_matrix(const EulerAngles& angles) {
  if (std::numbers::pi / 2.0 - std::abs(angles.theta) < kPitchSingularityMargin) {
    throw SingularAttitude("euler_rate_matrix: pitch within guard band of +/-90 deg, theta = " +
                           std::to_string(angles.theta));
  }
  const double cphi = std::cos(angles.phi), sphi = std::sin(angles.phi);
  const double cth = std::cos(angles.theta), tth = std::tan(angles.theta);

  Mat3 m;
  m << 1.0, sphi * tth, cphi * tth,
       0.0, cphi,       -sphi,
       0.0, sphi / cth, cphi / cth;
  return m;
}

Vec3 body_rates_to_euler_rates(const EulerAngles& angles, const BodyRates& rates) {
  return euler_rate_matrix(angles) * Vec3(rates.p, rates.q, rates.r);
}

}  // namespace quadsim
