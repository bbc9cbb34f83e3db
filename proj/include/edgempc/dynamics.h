#ifndef EDGEMPC_DYNAMICS_H_
#define EDGEMPC_DYNAMICS_H_

#include <Eigen/Core>

namespace edgempc {

using Vec3 = Eigen::Vector3d;
// (px, py, pz, vx, vy, vz, roll, pitch)
using StateVector = Eigen::Matrix<double, 8, 1>;
// (thrust, roll_ref, pitch_ref)
using InputVector = Eigen::Vector3d;

inline constexpr int kStateDim = 8;
inline constexpr int kInputDim = 3;

// Position and velocity in the world frame, attitude in radians.
struct UavState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double roll = 0.0;
  double pitch = 0.0;

  StateVector ToVector() const;
  static UavState FromVector(const StateVector& x);
  bool IsFinite() const;

  friend bool operator==(const UavState&, const UavState&) = default;
};

// Mass-normalized thrust (m/s^2) plus roll/pitch references (rad).
struct ControlInput {
  double thrust = 0.0;
  double roll_ref = 0.0;
  double pitch_ref = 0.0;

  InputVector ToVector() const { return {thrust, roll_ref, pitch_ref}; }
  static ControlInput FromVector(const InputVector& u) {
    return {u(0), u(1), u(2)};
  }
  bool IsFinite() const;

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct ModelParams {
  double gravity = 9.81;
  Vec3 damping{0.1, 0.1, 0.2};
  double roll_gain = 1.0;
  double pitch_gain = 1.0;
  double roll_time_constant = 0.5;
  double pitch_time_constant = 0.5;
  // Plant steps clamp |roll|, |pitch| to pi/2 - attitude_margin.
  double attitude_margin = 0.05;

  // Throws ModelDomainError naming the offending field.
  void Validate() const;
  double AttitudeLimit() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct StateDerivative {
  Vec3 position_rate = Vec3::Zero();
  Vec3 velocity_rate = Vec3::Zero();
  double roll_rate = 0.0;
  double pitch_rate = 0.0;
};

// Body z-axis expressed in the world frame for yaw-free ZYX angles.
Vec3 ThrustDirection(double roll, double pitch);

StateDerivative ComputeStateDerivative(const UavState& x, const ControlInput& u,
                                       const ModelParams& params);

// x + dt * f(x, u) with the attitude clamped afterwards.
UavState StepEuler(const UavState& x, const ControlInput& u,
                   const ModelParams& params, double dt);

// Classical RK4 with the input held over the step, attitude clamped after.
UavState StepRk4(const UavState& x, const ControlInput& u,
                 const ModelParams& params, double dt);

namespace detail {

// Unchecked vector forms used on the solver hot path.
StateVector Derivative(const StateVector& x, const InputVector& u,
                       const ModelParams& params);
inline StateVector EulerUnclamped(const StateVector& x, const InputVector& u,
                                  const ModelParams& params, double dt) {
  return x + dt * Derivative(x, u, params);
}

// Jacobians of the Euler map x + dt f(x, u).
void EulerJacobians(const StateVector& x, const InputVector& u,
                    const ModelParams& params, double dt,
                    Eigen::Matrix<double, 8, 8>* fx,
                    Eigen::Matrix<double, 8, 3>* fu);

}  // namespace detail
}  // namespace edgempc

#endif  // EDGEMPC_DYNAMICS_H_
