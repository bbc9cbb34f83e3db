#ifndef EDGEMPC_RUNTIME_H_
#define EDGEMPC_RUNTIME_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgempc/dynamics.h"
#include "edgempc/mpc.h"
#include "edgempc/netsim.h"
#include "edgempc/reference.h"

namespace edgempc {

enum class ClockMode { kDeterministic, kRealtime };

std::string_view ToString(ClockMode mode);
ClockMode ClockModeFromString(std::string_view name);

// How controller execution time enters the loop. kMeasured uses the solver's
// wall time; kSimulated injects a fixed delay of `simulated_ms`.
struct ExecModel {
  enum class Kind { kMeasured, kSimulated };
  Kind kind = Kind::kSimulated;
  double simulated_ms = 0.0;

  static ExecModel Measured() { return {Kind::kMeasured, 0.0}; }
  static ExecModel Simulated(double ms) { return {Kind::kSimulated, ms}; }

  friend bool operator==(const ExecModel&, const ExecModel&) = default;
};

// "measured" or "simulated:<ms>".
std::string ToString(const ExecModel& model);
ExecModel ExecModelFromString(std::string_view text);

struct ScenarioConfig {
  std::string name = "custom";
  TrajectorySpec trajectory;
  std::string profile_name = "ideal";
  LinkProfiles link;
  double control_rate = 100.0;
  double plant_rate = 500.0;
  MpcConfig mpc;
  ModelParams model;
  ClockMode mode = ClockMode::kDeterministic;
  ExecModel exec = ExecModel::Simulated(0.0);
  std::uint64_t seed = 1;
  double duration = 80.0;
  // Tracking statistics ignore cycles before this time (s).
  double transient = 5.0;
  // Start position; the trajectory's initial point when absent.
  std::optional<Vec3> initial_position;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;

  friend bool operator==(const ScenarioConfig&,
                         const ScenarioConfig&) = default;
};

// One controller activation. Delays in milliseconds.
struct CycleRecord {
  std::int64_t k = 0;
  double t = 0.0;  // odometry publish time, s
  double ttre = 0.0;
  double exec = 0.0;
  double tter = 0.0;
  double rtt = 0.0;
  UavState state_at_send;
  ControlInput applied_input;
  ReferencePoint reference;
  double tracking_error = 0.0;
  double cost = 0.0;
  int iterations = 0;
  bool degraded = false;
  // Accepted solver costs were non-increasing.
  bool descent_ok = true;
  std::uint64_t odometry_seq = 0;
  std::uint64_t command_seq = 0;

  friend bool operator==(const CycleRecord&, const CycleRecord&) = default;
};

// Plant-side log entry for each command taken into use.
struct CommandApplication {
  double t_applied = 0.0;
  double t_published = 0.0;
  double t_deliver = 0.0;
  std::uint64_t seq = 0;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct EpisodeSummary {
  Stat ttre, exec, tter, rtt;
  // Post-transient tracking error, m. Zeroed when no cycle qualifies.
  Stat tracking;
  std::size_t cycles = 0;
  std::size_t tracked_cycles = 0;
  std::size_t degraded_cycles = 0;
  bool descent_ok = true;
  bool inputs_feasible = true;
  std::string scenario;
  std::uint64_t seed = 0;
  double duration = 0.0;
};

struct EpisodeResult {
  std::vector<CycleRecord> records;
  EpisodeSummary summary;
  std::vector<CommandApplication> applications;
  // Final-time bus accounting, indexed by Topic.
  std::array<std::uint64_t, kTopicCount> published{};
  std::array<std::uint64_t, kTopicCount> delivered{};
  std::array<std::uint64_t, kTopicCount> in_flight{};
};

EpisodeResult RunEpisode(const ScenarioConfig& cfg);

// T_ttre + T_exec + T_tter.
double ComputeRtt(const CycleRecord& record);

double EuclideanError(const Vec3& p, const Vec3& p_ref);

// Throws std::invalid_argument on empty input.
EpisodeSummary Summarize(const std::vector<CycleRecord>& records,
                         double transient = 5.0);

}  // namespace edgempc

#endif  // EDGEMPC_RUNTIME_H_
