#pragma once

#include <vector>

#include "quadsim/dynamics.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

/// Parallel-form PD gains with first-order derivative filter coefficient N:
/// u(s) = (kp + kd * N s / (s + N)) e(s).
struct PdGains {
  double kp = 0.0;
  double kd = 0.0;
  double filter_coeff = 114.286;

  static PdGains altitude_default() { return {0.189, 0.878, 114.286}; }
  static PdGains attitude_default() { return {3.08e-3, 1.43e-2, 114.286}; }
};

/// Discrete PD with filtered derivative, Tustin-discretized at period dt.
/// The derivative acts on the error, so setpoint changes produce the
/// expected derivative kick. reset() zeroes the filter state.
class PdController {
 public:
  PdController(const PdGains& gains, double dt);

  double step(double error);
  void reset();

  const PdGains& gains() const { return gains_; }
  double dt() const { return dt_; }
  /// Magnitude of the discrete derivative-filter pole; < 1 iff stable.
  double filter_pole() const { return pole_; }

 private:
  PdGains gains_;
  double dt_;
  double pole_;        // recursion coefficient on previous derivative output
  double diff_gain_;   // gain on the error increment
  double prev_error_ = 0.0;
  double prev_derivative_ = 0.0;
};

/// Rotor speed at which total thrust balances weight: sqrt(m g / (4 Ct)).
double hover_speed(const QuadParams& params);

/// Altitude loop output: PD on the z error plus weight feedforward m g.
double altitude_control(PdController& pd, double z_desired, double z_actual,
                        const QuadParams& params);

/// Attitude loop output: PD on the angle error, no feedforward.
double attitude_control(PdController& pd, double desired, double actual);

/// Inertia constants K of the decoupled double-integrator plants 1/(K s^2)
/// seen by the four loops near hover.
struct LinearPlants {
  double altitude;  // mass
  double roll;      // ixx
  double pitch;     // iyy
  double yaw;       // izz
};
LinearPlants linear_plants(const QuadParams& params);

enum class ReferenceKind { kStep, kRamp };

struct LinearLoopTrace {
  double dt = 0.0;
  std::vector<double> reference;
  std::vector<double> output;
};

/// Unity-feedback simulation of PD against 1/(K s^2). The plant is
/// discretized exactly under zero-order hold at the controller period.
LinearLoopTrace simulate_linear_closed_loop(double plant_constant, const PdGains& gains,
                                            ReferenceKind kind, double duration, double dt);

struct StepMetrics {
  double rise_time = 0.0;          // 10% -> 90% of the reference level
  double settling_time = 0.0;      // last entry into the +/-2% band
  double overshoot_percent = 0.0;  // (peak - ref) / ref * 100, floored at 0
  double peak = 0.0;
};

/// Metrics of a step response toward a nonzero reference level.
/// Throws NoSettle if the trace never stays inside the 2% band.
StepMetrics step_metrics(const std::vector<double>& output, double dt, double reference);

/// Steady thrust-to-acceleration map f(F) = F/m - g is affine, not linear:
/// both gaps are exactly zero only when g = 0.
struct LinearityGaps {
  double additivity;    // f(u+v) - (f(u) + f(v)), equals +g
  double homogeneity;   // f(c v) - c f(v), equals (c-1) g
};
LinearityGaps check_affine_not_linear(const QuadParams& params, double u, double v, double c);

/// |reference - output| at the end of the horizon for a step or ramp input.
/// Both vanish in the limit (double integrator inside the loop).
/// Throws NoSettle if the loop diverges.
double steady_state_error(double plant_constant, const PdGains& gains, ReferenceKind kind,
                          double horizon, double dt);

}  // namespace quadsim
