#include "edgempc/dynamics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "edgempc/errors.h"

namespace edgempc {

StateVector UavState::ToVector() const {
  StateVector x;
  x << position, velocity, roll, pitch;
  return x;
}

UavState UavState::FromVector(const StateVector& x) {
  return {x.segment<3>(0), x.segment<3>(3), x(6), x(7)};
}

bool UavState::IsFinite() const { return ToVector().allFinite(); }

bool ControlInput::IsFinite() const {
  return std::isfinite(thrust) && std::isfinite(roll_ref) &&
         std::isfinite(pitch_ref);
}

void ModelParams::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ModelDomainError(std::string("model.") + what);
  };
  require(std::isfinite(gravity) && gravity > 0.0, "gravity must be > 0");
  require(damping.allFinite() && (damping.array() >= 0.0).all(),
          "damping must be >= 0");
  require(std::isfinite(roll_gain) && std::isfinite(pitch_gain),
          "roll_gain and pitch_gain must be finite");
  require(std::isfinite(roll_time_constant) && roll_time_constant > 0.0,
          "roll_time_constant must be > 0");
  require(std::isfinite(pitch_time_constant) && pitch_time_constant > 0.0,
          "pitch_time_constant must be > 0");
  require(std::isfinite(attitude_margin) && attitude_margin >= 0.0 &&
              attitude_margin < std::numbers::pi / 2,
          "attitude_margin must be in [0, pi/2)");
}

double ModelParams::AttitudeLimit() const {
  return std::numbers::pi / 2 - attitude_margin;
}

Vec3 ThrustDirection(double roll, double pitch) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  return {sp * cr, -sr, cp * cr};
}

namespace detail {

StateVector Derivative(const StateVector& x, const InputVector& u,
                       const ModelParams& params) {
  StateVector dx;
  const Vec3 dir = ThrustDirection(x(6), x(7));
  dx.segment<3>(0) = x.segment<3>(3);
  dx.segment<3>(3) = u(0) * dir -
                     params.damping.cwiseProduct(x.segment<3>(3));
  dx(5) -= params.gravity;
  dx(6) = (params.roll_gain * u(1) - x(6)) / params.roll_time_constant;
  dx(7) = (params.pitch_gain * u(2) - x(7)) / params.pitch_time_constant;
  return dx;
}

void EulerJacobians(const StateVector& x, const InputVector& u,
                    const ModelParams& params, double dt,
                    Eigen::Matrix<double, 8, 8>* fx,
                    Eigen::Matrix<double, 8, 3>* fu) {
  const double cr = std::cos(x(6)), sr = std::sin(x(6));
  const double cp = std::cos(x(7)), sp = std::sin(x(7));
  const double thrust = u(0);

  fx->setIdentity();
  fx->block<3, 3>(0, 3).diagonal().setConstant(dt);
  for (int i = 0; i < 3; ++i) (*fx)(3 + i, 3 + i) -= dt * params.damping(i);
  // d(dir)/d(roll) and d(dir)/d(pitch)
  (*fx)(3, 6) = dt * thrust * (-sp * sr);
  (*fx)(4, 6) = dt * thrust * (-cr);
  (*fx)(5, 6) = dt * thrust * (-cp * sr);
  (*fx)(3, 7) = dt * thrust * (cp * cr);
  (*fx)(4, 7) = 0.0;
  (*fx)(5, 7) = dt * thrust * (-sp * cr);
  (*fx)(6, 6) -= dt / params.roll_time_constant;
  (*fx)(7, 7) -= dt / params.pitch_time_constant;

  fu->setZero();
  (*fu)(3, 0) = dt * sp * cr;
  (*fu)(4, 0) = dt * (-sr);
  (*fu)(5, 0) = dt * cp * cr;
  (*fu)(6, 1) = dt * params.roll_gain / params.roll_time_constant;
  (*fu)(7, 2) = dt * params.pitch_gain / params.pitch_time_constant;
}

}  // namespace detail

namespace {

void CheckInputs(const UavState& x, const ControlInput& u) {
  if (!x.IsFinite()) throw ModelDomainError("state has non-finite components");
  if (!u.IsFinite()) throw ModelDomainError("input has non-finite components");
}

void CheckStep(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("integration step must be finite and >= 0");
  }
}

UavState ClampAttitude(StateVector x, const ModelParams& params) {
  const double limit = params.AttitudeLimit();
  x(6) = std::clamp(x(6), -limit, limit);
  x(7) = std::clamp(x(7), -limit, limit);
  return UavState::FromVector(x);
}

}  // namespace

StateDerivative ComputeStateDerivative(const UavState& x, const ControlInput& u,
                                       const ModelParams& params) {
  CheckInputs(x, u);
  const StateVector dx = detail::Derivative(x.ToVector(), u.ToVector(), params);
  return {dx.segment<3>(0), dx.segment<3>(3), dx(6), dx(7)};
}

UavState StepEuler(const UavState& x, const ControlInput& u,
                   const ModelParams& params, double dt) {
  CheckStep(dt);
  CheckInputs(x, u);
  if (dt == 0.0) return x;
  return ClampAttitude(
      detail::EulerUnclamped(x.ToVector(), u.ToVector(), params, dt), params);
}

UavState StepRk4(const UavState& x, const ControlInput& u,
                 const ModelParams& params, double dt) {
  CheckStep(dt);
  CheckInputs(x, u);
  if (dt == 0.0) return x;
  const StateVector x0 = x.ToVector();
  const InputVector uv = u.ToVector();
  const StateVector k1 = detail::Derivative(x0, uv, params);
  const StateVector k2 = detail::Derivative(x0 + 0.5 * dt * k1, uv, params);
  const StateVector k3 = detail::Derivative(x0 + 0.5 * dt * k2, uv, params);
  const StateVector k4 = detail::Derivative(x0 + dt * k3, uv, params);
  return ClampAttitude(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
                       params);
}

}  // namespace edgempc
