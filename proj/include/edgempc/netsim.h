#ifndef EDGEMPC_NETSIM_H_
#define EDGEMPC_NETSIM_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

#include "edgempc/dynamics.h"
#include "edgempc/mpc.h"

namespace edgempc {

// Simulation clock: integer nanoseconds so that configured delays are exact.
using SimDuration = std::chrono::nanoseconds;
using SimTime = std::chrono::nanoseconds;

inline double ToSeconds(SimDuration d) { return static_cast<double>(d.count()) / 1e9; }
inline double ToMillis(SimDuration d) { return static_cast<double>(d.count()) / 1e6; }
SimDuration FromSeconds(double seconds);
SimDuration FromMillis(double millis);

enum class DelayDistribution { kDegenerate, kLognormalWithSpikes };

std::string_view ToString(DelayDistribution d);
DelayDistribution DelayDistributionFromString(std::string_view name);

// One-way link delay model, all times in milliseconds. For the lognormal
// body, `mean` and `jitter_std` are the moments of the delay itself (before
// spikes and the floor are applied).
struct LatencyProfile {
  double mean = 0.0;
  double jitter_std = 0.0;
  double spike_prob = 0.0;
  double spike_scale = 1.0;
  double floor = 0.0;
  DelayDistribution distribution = DelayDistribution::kDegenerate;

  void Validate() const;

  static LatencyProfile Degenerate(double mean_ms);
  // Lognormal body with jitter 0.25 * mean, 1% spikes of 5x.
  static LatencyProfile Stochastic(double mean_ms);

  friend bool operator==(const LatencyProfile&,
                         const LatencyProfile&) = default;
};

// Robot -> edge (uplink) and edge -> robot (downlink).
struct LinkProfiles {
  LatencyProfile uplink;
  LatencyProfile downlink;

  friend bool operator==(const LinkProfiles&, const LinkProfiles&) = default;
};

// Named presets: "ideal", "profile-A" (14.2 / 17.6 ms), "profile-B"
// (9.5 / 13.1 ms). Throws std::invalid_argument for unknown names.
LinkProfiles LinkPreset(std::string_view name, DelayDistribution distribution);

// Seeded pseudo-random stream for one link direction.
class LinkRng {
 public:
  explicit LinkRng(std::uint64_t seed, std::uint64_t stream = 0);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Delay in milliseconds, never below profile.floor.
double SampleDelay(const LatencyProfile& profile, LinkRng& rng);

enum class Topic : int { kOdometry = 0, kReference = 1, kCommand = 2 };
inline constexpr int kTopicCount = 3;
std::string_view ToString(Topic topic);

using Payload = std::variant<UavState, ReferencePoint, ControlInput>;

struct StampedMessage {
  std::uint64_t seq = 0;
  Topic topic = Topic::kOdometry;
  SimTime published{0};
  SimTime deliver{0};
  Payload payload;

  SimDuration transit() const { return deliver - published; }
};

// Topic-based message bus with per-message delay injection. Delivery per
// topic is FIFO: a message never becomes deliverable before an earlier one on
// the same topic. All methods are internally synchronized.
class MessageBus {
 public:
  MessageBus() = default;
  MessageBus(const MessageBus&) = delete;
  MessageBus& operator=(const MessageBus&) = delete;

  // Returns the message's seq. Throws LifecycleError after Close().
  std::uint64_t Publish(Topic topic, Payload payload, SimTime now,
                        const LatencyProfile& profile, LinkRng& rng);
  // Same with an already-sampled delay.
  std::uint64_t PublishWithDelay(Topic topic, Payload payload, SimTime now,
                                 SimDuration delay);

  // Removes and returns every message with deliver <= now, in seq order.
  std::vector<StampedMessage> PollDeliveries(Topic topic, SimTime now);

  // Delivery time of the most recent publication on the topic.
  SimTime LastDelivery(Topic topic) const;

  // Earliest pending delivery time on the topic, if any.
  std::optional<SimTime> NextDelivery(Topic topic) const;

  void Close();
  bool closed() const;

  std::uint64_t published_count(Topic topic) const;
  std::uint64_t delivered_count(Topic topic) const;
  std::size_t in_flight(Topic topic) const;

 private:
  struct Channel {
    std::deque<StampedMessage> queue;
    std::uint64_t next_seq = 0;
    std::uint64_t delivered = 0;
    SimTime last_deliver{0};
  };

  mutable std::mutex mutex_;
  std::array<Channel, kTopicCount> channels_;
  bool closed_ = false;
};

}  // namespace edgempc

#endif  // EDGEMPC_NETSIM_H_
