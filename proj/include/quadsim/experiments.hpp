#pragma once

#include <array>
#include <string>
#include <vector>

#include "quadsim/actuation.hpp"
#include "quadsim/control_fuzzy.hpp"
#include "quadsim/control_linear.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

/// Constant hover-regulation setpoint. Lateral position is unregulated.
struct DesiredState {
  double z = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

/// One full set of per-axis regulators sampled synchronously with the plant.
class ControllerBank {
 public:
  virtual ~ControllerBank() = default;
  virtual void reset() = 0;
  virtual ControlVector compute(const DesiredState& desired, const QuadState& state,
                                const QuadParams& params) = 0;
};

class PdBank final : public ControllerBank {
 public:
  PdBank(const PdGains& altitude, const PdGains& attitude, double dt);
  void reset() override;
  ControlVector compute(const DesiredState& desired, const QuadState& state,
                        const QuadParams& params) override;

 private:
  PdController altitude_, roll_, pitch_, yaw_;
};

class FuzzyBank final : public ControllerBank {
 public:
  /// Error rates come from backward differences at the loop period (zero on
  /// the first sample). Inputs are clamped to each model's trained range
  /// before inference so excursions beyond the data cannot defire the rules.
  FuzzyBank(SugenoFis altitude_model, SugenoFis attitude_model, double dt);
  void reset() override;
  ControlVector compute(const DesiredState& desired, const QuadState& state,
                        const QuadParams& params) override;

 private:
  SugenoFis altitude_model_, attitude_model_;
  double dt_;
  bool primed_ = false;
  std::array<double, 4> prev_error_{};
};

enum class Integrator { kRk4, kEuler };

struct ScenarioConfig {
  QuadState initial;
  DesiredState desired;
  double duration = 20.0;
  double dt = 0.01;
  QuadParams params;
  SpeedLimits limits;
  Integrator integrator = Integrator::kRk4;
};

struct TraceSample {
  double t = 0.0;
  QuadState state;
  ControlVector controls;
  RotorSpeeds speeds;
  std::array<bool, 4> saturated{};
};

struct SimTrace {
  double dt = 0.01;
  std::vector<TraceSample> samples;
  std::string abort_reason;  // empty when the run finished cleanly
  bool aborted() const { return !abort_reason.empty(); }
};

/// Four piecewise rotor-speed sinusoids around hover: a collective climb
/// burst for two seconds, then staggered per-motor amplitudes exciting roll,
/// pitch and yaw in turn. Defined on [0, 8] seconds only.
RotorSpeeds open_loop_profile(double t, const QuadParams& params);

/// Integrate the free plant under open_loop_profile from the zero state.
/// A pitch-singularity abort returns the partial trace with a diagnostic.
SimTrace run_open_loop(const QuadParams& params, double dt = 0.01);

/// Sample state -> controller -> mixer -> one integration step, repeated.
/// The final sample's controls are computed but not applied.
SimTrace run_closed_loop(const ScenarioConfig& config, ControllerBank& controller);

struct AxisMetrics {
  bool settled = false;
  double settling_time = 0.0;     // entry into the 2% band it never leaves
  double overshoot_percent = 0.0; // excursion past the setpoint, % of normalizer
  double overshoot_abs = 0.0;
  double peak_deviation = 0.0;
  double initial_deviation = 0.0;
};

/// Regulation metrics against a constant setpoint. The band normalizer is
/// |initial deviation|, falling back to peak |deviation| when the series
/// starts on the setpoint (pure disturbance rejection).
AxisMetrics regulation_metrics(const std::vector<double>& series, double dt, double desired);

/// Pull one regulated axis out of a trace (z, phi, theta, psi).
std::vector<double> axis_series(const SimTrace& trace, ControlAxis axis);

struct AxisComparison {
  std::string name;
  AxisMetrics base;
  AxisMetrics candidate;
  double settling_improvement_percent = 0.0;  // (t_base - t_cand)/t_base * 100
  double overshoot_delta = 0.0;               // candidate - base, percent points
};

struct ComparisonReport {
  std::array<AxisComparison, 4> axes;  // z, phi, theta, psi
};

/// Per-axis regulation metrics for two traces of the same scenario.
/// Throws ValidationError when dt or length disagree.
ComparisonReport compare_controllers(const SimTrace& base, const SimTrace& candidate,
                                     const DesiredState& desired = {});

std::string format_report(const ComparisonReport& report);

/// Header: t,x,y,z,vx,vy,vz,phi,theta,psi,p,q,r,u1,u2,u3,u4,w1,w2,w3,w4,
/// sat1,sat2,sat3,sat4. Angles in degrees, 9 significant digits, flags 0/1.
void write_trace_csv(const SimTrace& trace, const std::string& path);
SimTrace read_trace_csv(const std::string& path);

}  // namespace quadsim
