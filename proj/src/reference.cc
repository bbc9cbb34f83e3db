#include "edgempc/reference.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace edgempc {

std::string_view ToString(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kSetpoint:
      return "setpoint";
    case TrajectoryKind::kCircular:
      return "circular";
    case TrajectoryKind::kHelical:
      return "helical";
  }
  return "unknown";
}

TrajectoryKind TrajectoryKindFromString(std::string_view name) {
  if (name == "setpoint") return TrajectoryKind::kSetpoint;
  if (name == "circular") return TrajectoryKind::kCircular;
  if (name == "helical") return TrajectoryKind::kHelical;
  throw std::invalid_argument("unknown trajectory kind '" + std::string(name) +
                              "' (expected setpoint, circular or helical)");
}

void TrajectorySpec::Validate() const {
  if (!center.allFinite()) throw std::invalid_argument("trajectory.center must be finite");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("trajectory.radius must be >= 0");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("trajectory.duration must be > 0");
  }
  if (!std::isfinite(angular_rate)) {
    throw std::invalid_argument("trajectory.angular_rate must be finite");
  }
  if (!std::isfinite(climb_rate) || !std::isfinite(start_altitude) ||
      !std::isfinite(phase)) {
    throw std::invalid_argument(
        "trajectory climb_rate, start_altitude and phase must be finite");
  }
}

ReferencePoint SampleReference(const TrajectorySpec& spec, double t) {
  if (!(t >= 0.0 && t <= spec.duration)) {
    throw std::out_of_range("reference time " + std::to_string(t) +
                            " outside [0, " + std::to_string(spec.duration) +
                            "]");
  }
  ReferencePoint ref;
  UavState& s = ref.state;
  if (spec.kind == TrajectoryKind::kSetpoint) {
    s.position = spec.center + Vec3(0.0, 0.0, spec.start_altitude);
    return ref;
  }
  const double angle = spec.angular_rate * t + spec.phase;
  const double c = std::cos(angle), sn = std::sin(angle);
  const double r = spec.radius, w = spec.angular_rate;
  s.position = spec.center + Vec3(r * c, r * sn, spec.start_altitude);
  s.velocity = Vec3(-r * w * sn, r * w * c, 0.0);
  if (spec.kind == TrajectoryKind::kHelical) {
    s.position.z() += spec.climb_rate * t;
    s.velocity.z() = spec.climb_rate;
  }
  return ref;
}

std::vector<ReferencePoint> ReferenceWindow(const TrajectorySpec& spec,
                                            double t, int count, double dt) {
  std::vector<ReferencePoint> out;
  out.reserve(std::max(count, 0));
  for (int j = 0; j < count; ++j) {
    out.push_back(SampleReference(spec, std::min(t + j * dt, spec.duration)));
  }
  return out;
}

}  // namespace edgempc
