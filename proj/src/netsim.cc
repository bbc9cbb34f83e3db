#include "edgempc/netsim.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "edgempc/errors.h"

namespace edgempc {

SimDuration FromSeconds(double seconds) {
  return SimDuration(std::llround(seconds * 1e9));
}

SimDuration FromMillis(double millis) {
  return SimDuration(std::llround(millis * 1e6));
}

std::string_view ToString(DelayDistribution d) {
  return d == DelayDistribution::kDegenerate ? "degenerate"
                                             : "lognormal-with-spikes";
}

DelayDistribution DelayDistributionFromString(std::string_view name) {
  if (name == "degenerate") return DelayDistribution::kDegenerate;
  if (name == "lognormal-with-spikes" || name == "stochastic") {
    return DelayDistribution::kLognormalWithSpikes;
  }
  throw std::invalid_argument(
      "unknown delay distribution '" + std::string(name) +
      "' (expected degenerate or lognormal-with-spikes)");
}

void LatencyProfile::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("latency profile: ") + what);
  };
  require(std::isfinite(mean) && std::isfinite(floor) && floor >= 0.0 &&
              mean >= floor,
          "requires mean >= floor >= 0");
  require(std::isfinite(jitter_std) && jitter_std >= 0.0,
          "jitter_std must be >= 0");
  require(spike_prob >= 0.0 && spike_prob <= 1.0,
          "spike_prob must be in [0, 1]");
  require(std::isfinite(spike_scale) && spike_scale >= 1.0,
          "spike_scale must be >= 1");
}

LatencyProfile LatencyProfile::Degenerate(double mean_ms) {
  LatencyProfile p;
  p.mean = mean_ms;
  return p;
}

LatencyProfile LatencyProfile::Stochastic(double mean_ms) {
  LatencyProfile p;
  p.mean = mean_ms;
  p.jitter_std = 0.25 * mean_ms;
  p.spike_prob = 0.01;
  p.spike_scale = 5.0;
  p.distribution = DelayDistribution::kLognormalWithSpikes;
  return p;
}

LinkProfiles LinkPreset(std::string_view name, DelayDistribution distribution) {
  auto make = [distribution](double mean) {
    return distribution == DelayDistribution::kDegenerate
               ? LatencyProfile::Degenerate(mean)
               : LatencyProfile::Stochastic(mean);
  };
  if (name == "ideal") return {LatencyProfile{}, LatencyProfile{}};
  if (name == "profile-A") return {make(14.2), make(17.6)};
  if (name == "profile-B") return {make(9.5), make(13.1)};
  throw std::invalid_argument("unknown latency profile '" + std::string(name) +
                              "' (expected ideal, profile-A or profile-B)");
}

LinkRng::LinkRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double SampleDelay(const LatencyProfile& profile, LinkRng& rng) {
  if (profile.distribution == DelayDistribution::kDegenerate ||
      profile.mean <= 0.0) {
    return std::max(profile.mean, profile.floor);
  }
  double delay = profile.mean;
  if (profile.jitter_std > 0.0) {
    const double ratio = profile.jitter_std / profile.mean;
    const double sigma2 = std::log1p(ratio * ratio);
    std::lognormal_distribution<double> body(
        std::log(profile.mean) - 0.5 * sigma2, std::sqrt(sigma2));
    delay = body(rng.engine());
  }
  // Always consume the spike draw so the stream layout does not depend on
  // the outcome.
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng.engine()) < profile.spike_prob) delay *= profile.spike_scale;
  return std::max(delay, profile.floor);
}

std::string_view ToString(Topic topic) {
  switch (topic) {
    case Topic::kOdometry:
      return "odometry";
    case Topic::kReference:
      return "reference";
    case Topic::kCommand:
      return "command";
  }
  return "unknown";
}

std::uint64_t MessageBus::Publish(Topic topic, Payload payload, SimTime now,
                                  const LatencyProfile& profile, LinkRng& rng) {
  const double delay_ms = SampleDelay(profile, rng);
  return PublishWithDelay(topic, std::move(payload), now, FromMillis(delay_ms));
}

std::uint64_t MessageBus::PublishWithDelay(Topic topic, Payload payload,
                                           SimTime now, SimDuration delay) {
  std::lock_guard lock(mutex_);
  if (closed_) throw LifecycleError("publish on a closed message bus");
  Channel& ch = channels_[static_cast<int>(topic)];
  StampedMessage msg;
  msg.seq = ++ch.next_seq;
  msg.topic = topic;
  msg.published = now;
  msg.deliver = std::max(now + std::max(delay, SimDuration::zero()),
                         ch.last_deliver);
  msg.payload = std::move(payload);
  ch.last_deliver = msg.deliver;
  ch.queue.push_back(std::move(msg));
  return ch.next_seq;
}

std::vector<StampedMessage> MessageBus::PollDeliveries(Topic topic,
                                                       SimTime now) {
  std::lock_guard lock(mutex_);
  Channel& ch = channels_[static_cast<int>(topic)];
  std::vector<StampedMessage> out;
  while (!ch.queue.empty() && ch.queue.front().deliver <= now) {
    out.push_back(std::move(ch.queue.front()));
    ch.queue.pop_front();
  }
  ch.delivered += out.size();
  return out;
}

std::optional<SimTime> MessageBus::NextDelivery(Topic topic) const {
  std::lock_guard lock(mutex_);
  const Channel& ch = channels_[static_cast<int>(topic)];
  if (ch.queue.empty()) return std::nullopt;
  return ch.queue.front().deliver;
}

SimTime MessageBus::LastDelivery(Topic topic) const {
  std::lock_guard lock(mutex_);
  return channels_[static_cast<int>(topic)].last_deliver;
}

void MessageBus::Close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
}

bool MessageBus::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::uint64_t MessageBus::published_count(Topic topic) const {
  std::lock_guard lock(mutex_);
  return channels_[static_cast<int>(topic)].next_seq;
}

std::uint64_t MessageBus::delivered_count(Topic topic) const {
  std::lock_guard lock(mutex_);
  return channels_[static_cast<int>(topic)].delivered;
}

std::size_t MessageBus::in_flight(Topic topic) const {
  std::lock_guard lock(mutex_);
  return channels_[static_cast<int>(topic)].queue.size();
}

}  // namespace edgempc
