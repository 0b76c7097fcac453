#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace quadsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Roll, pitch, yaw in radians (ZYX convention: yaw about world z,
/// then pitch about intermediate y, then roll about body x).
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

/// Angular velocity about the body axes, rad/s.
struct BodyRates {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
};

/// Rigid-body state: world-frame position/velocity, attitude, body rates.
struct QuadState {
  Vec3 position = Vec3::Zero();   // m, world frame, z up
  Vec3 velocity = Vec3::Zero();   // m/s, world frame
  EulerAngles angles;
  BodyRates rates;
};

/// Rotor spin rates in rpm, indexed 1..4 (front, right, rear, left).
struct RotorSpeeds {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double w4 = 0.0;

  double operator[](int i) const {
    switch (i) {
      case 0: return w1;
      case 1: return w2;
      case 2: return w3;
      default: return w4;
    }
  }
  double& operator[](int i) {
    switch (i) {
      case 0: return w1;
      case 1: return w2;
      case 2: return w3;
      default: return w4;
    }
  }
};

/// Collective thrust [N] plus body torques [N m] about x, y, z.
struct ControlVector {
  double thrust = 0.0;
  double tau_phi = 0.0;
  double tau_theta = 0.0;
  double tau_psi = 0.0;
};

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pitch within the guard band of +/-90 deg: Euler kinematics undefined.
struct SingularAttitude : SimError {
  using SimError::SimError;
};

/// Total rule firing strength below threshold; fuzzy output undefined.
struct DegenerateFiring : SimError {
  using SimError::SimError;
};

/// Rank-deficient least-squares regressor: training data lacks diversity.
struct SingularLsq : SimError {
  using SimError::SimError;
};

/// Response never stays inside the settling band.
struct NoSettle : SimError {
  using SimError::SimError;
};

/// Time outside the domain of a piecewise input profile.
struct OutOfWindow : SimError {
  using SimError::SimError;
};

/// A teacher run left the sane-state envelope.
struct ScenarioDiverged : SimError {
  using SimError::SimError;
};

/// Degenerate input span (membership grid would collapse).
struct InvalidRange : SimError {
  using SimError::SimError;
};

/// Malformed config/data file; message carries the line number.
struct ParseError : SimError {
  using SimError::SimError;
};

/// Parsed value violates a physical invariant; message names it.
struct ValidationError : SimError {
  using SimError::SimError;
};

}  // namespace quadsim
