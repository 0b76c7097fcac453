#pragma once

#include <array>
#include <string>
#include <vector>

#include "quadsim/actuation.hpp"
#include "quadsim/control_linear.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

/// Generalized bell membership function 1 / (1 + |(x - c)/a|^(2b)).
struct BellMf {
  double width = 1.0;   // a, > 0
  double shape = 2.0;   // b, controls shoulder steepness
  double center = 0.0;  // c

  double eval(double x) const;
};

/// First-order polynomial rule output p*e + q*edot + r.
struct RuleConsequent {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
};

/// First-order Sugeno inference system on inputs (error, error rate).
/// Rules form the full grid over the two membership families; rule (i, j)
/// is stored at consequents[i * input2_mfs.size() + j].
struct SugenoFis {
  std::vector<BellMf> input1_mfs;
  std::vector<BellMf> input2_mfs;
  std::vector<RuleConsequent> consequents;
  double input1_min = 0.0, input1_max = 0.0;  // observed training range
  double input2_min = 0.0, input2_max = 0.0;

  /// Weighted-average rule blend. Throws DegenerateFiring when the total
  /// firing strength falls below 1e-12.
  double evaluate(double error, double error_rate) const;
};

/// Product-norm firing strength of every rule, row-major grid order.
std::vector<double> rule_firing(const SugenoFis& fis, double error, double error_rate);

struct TrainingSample {
  double error = 0.0;
  double error_rate = 0.0;
  double target = 0.0;
};

struct TrainingDataset {
  std::vector<TrainingSample> rows;
};

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 0.05;  // premise gradient step
  double holdout = 0.2;         // fraction of rows reserved for validation
  unsigned seed = 42;
};

struct TrainReport {
  std::vector<double> rmse_before_lsq;  // training RMSE entering each epoch
  std::vector<double> rmse_history;     // training RMSE after each least-squares substep
  double holdout_rmse = 0.0;
};

/// 5x5 grid seeded from the observed data span: centers uniform across each
/// input range, widths at half the center spacing (50% overlap), shape 2,
/// consequents zero. Throws InvalidRange on a degenerate input column.
SugenoFis anfis_init(const TrainingDataset& data);

/// Hybrid estimation: per epoch, exact least squares on the consequents with
/// premises frozen, then one gradient-descent pass on the premise parameters.
/// Throws SingularLsq when the inputs lack the diversity to pin a plane.
TrainReport anfis_train(SugenoFis& fis, const TrainingDataset& data, const TrainConfig& config);

/// Gradient of half the mean squared output error with respect to the premise
/// parameters, ordered (width, shape, center) per MF, input 1 family first.
std::vector<double> premise_gradient(const SugenoFis& fis, const TrainingDataset& data);

/// The regulated channel a controller output or teacher scenario refers to.
enum class ControlAxis { kAltitude, kRoll, kPitch, kYaw };

struct TeacherScenario {
  QuadState initial;
  ControlAxis channel = ControlAxis::kAltitude;
  double duration = 20.0;
};

struct TeacherBattery {
  std::vector<TeacherScenario> scenarios;
  double dt = 0.01;
  int skip_initial_steps = 0;  // simulated but not logged, per scenario
};

/// Initial-condition grid used by the bundled training runs: altitudes
/// spanning +/-2 m and single-axis attitudes spanning +/-70 deg, plus
/// approach scenarios with nonzero initial velocity/rate so braking
/// behaviour is represented. Seed applies a small documented jitter.
TeacherBattery default_training_battery(unsigned seed = 42);

struct TeacherData {
  TrainingDataset altitude;  // target: realized thrust minus weight feedforward
  TrainingDataset attitude;  // targets: realized axis torques, all axes pooled
};

/// Run the PD regulation loop over the battery and log (error, error rate,
/// realized control) per step on each scenario's channel. Targets are the
/// post-mixer realized values, so actuator limits bound the taught law.
/// Throws ScenarioDiverged if a run leaves the sane-state envelope.
TeacherData generate_training_data(const TeacherBattery& battery, const QuadParams& params,
                                   const PdGains& altitude_gains, const PdGains& attitude_gains,
                                   const SpeedLimits& limits = {});

/// One controller channel output. The altitude axis adds the weight
/// feedforward on top of the model output; attitude axes pass the shared
/// attitude model's torque through unchanged.
double fuzzy_controller_step(const SugenoFis& model, double error, double error_rate,
                             ControlAxis axis, const QuadParams& params);

/// Plain-text model file, 17 significant digits (lossless round-trip).
/// Requires the 5x5 trained layout.
void save_fis(const SugenoFis& fis, const std::string& path);
SugenoFis load_fis(const std::string& path);

}  // namespace quadsim
