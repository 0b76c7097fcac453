#pragma once

#include <array>

#include "quadsim/dynamics.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

/// Allowed rotor speed range, rpm.
struct SpeedLimits {
  double w_min = 0.0;
  double w_max = 12000.0;
};

struct MixResult {
  RotorSpeeds speeds;
  std::array<bool, 4> saturated{false, false, false, false};

  bool any_saturated() const {
    return saturated[0] || saturated[1] || saturated[2] || saturated[3];
  }
};

/// Invert the thrust/torque map to per-rotor speeds. Negative squared
/// speeds clamp to w_min^2 and out-of-range speeds clamp to the limits;
/// each clamp sets the rotor's saturation flag.
MixResult mix(const ControlVector& controls, const QuadParams& params,
              const SpeedLimits& limits = {});

/// Forward map: thrust and torques realized by the given speeds.
ControlVector speeds_to_controls(const RotorSpeeds& speeds, const QuadParams& params);

/// Affine rpm -> microsecond PWM command over the speed range.
double pwm_from_speed(double speed, const SpeedLimits& limits = {});

}  // namespace quadsim
