#ifndef EDGEMPC_REFERENCE_H_
#define EDGEMPC_REFERENCE_H_

#include <numbers>
#include <string_view>
#include <vector>

#include "edgempc/dynamics.h"
#include "edgempc/mpc.h"

namespace edgempc {

enum class TrajectoryKind { kSetpoint, kCircular, kHelical };

std::string_view ToString(TrajectoryKind kind);
// Throws std::invalid_argument for unknown names.
TrajectoryKind TrajectoryKindFromString(std::string_view name);

// Setpoint: center + (0, 0, start_altitude). Circular and helical orbit the
// center in the horizontal plane at start_altitude, helical climbing at
// climb_rate.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kCircular;
  Vec3 center = Vec3::Zero();
  double radius = 2.0;
  double angular_rate = 2.0 * std::numbers::pi / 40.0;
  double climb_rate = 0.0;
  double start_altitude = 2.0;
  double duration = 80.0;
  double phase = 0.0;

  void Validate() const;

  friend bool operator==(const TrajectorySpec&,
                         const TrajectorySpec&) = default;
};

// Throws std::out_of_range when t is outside [0, duration].
ReferencePoint SampleReference(const TrajectorySpec& spec, double t);

// Element j samples min(t + j * dt, duration).
std::vector<ReferencePoint> ReferenceWindow(const TrajectorySpec& spec,
                                            double t, int count, double dt);

}  // namespace edgempc

#endif  // EDGEMPC_REFERENCE_H_
