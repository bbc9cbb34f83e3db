#include "edgempc/runtime.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>

namespace edgempc {

std::string_view ToString(ClockMode mode) {
  return mode == ClockMode::kDeterministic ? "deterministic" : "realtime";
}

ClockMode ClockModeFromString(std::string_view name) {
  if (name == "deterministic") return ClockMode::kDeterministic;
  if (name == "realtime") return ClockMode::kRealtime;
  throw std::invalid_argument("unknown mode '" + std::string(name) +
                              "' (expected deterministic or realtime)");
}

std::string ToString(const ExecModel& model) {
  if (model.kind == ExecModel::Kind::kMeasured) return "measured";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), model.simulated_ms);
  return "simulated:" + std::string(buf, end);
}

ExecModel ExecModelFromString(std::string_view text) {
  if (text == "measured") return ExecModel::Measured();
  constexpr std::string_view prefix = "simulated:";
  if (text.starts_with(prefix)) {
    const std::string_view num = text.substr(prefix.size());
    double ms = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), ms);
    if (ec == std::errc() && ptr == num.data() + num.size() &&
        std::isfinite(ms) && ms >= 0.0) {
      return ExecModel::Simulated(ms);
    }
  }
  throw std::invalid_argument("invalid exec model '" + std::string(text) +
                              "' (expected measured or simulated:<ms>)");
}

void ScenarioConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(std::isfinite(control_rate) && control_rate > 0.0,
          "control_rate must be > 0");
  require(std::isfinite(plant_rate) && plant_rate >= control_rate,
          "plant_rate must be >= control_rate");
  require(std::isfinite(duration) && duration > 0.0, "duration must be > 0");
  require(std::isfinite(transient) && transient >= 0.0,
          "transient must be >= 0");
  require(exec.kind == ExecModel::Kind::kMeasured ||
              (std::isfinite(exec.simulated_ms) && exec.simulated_ms >= 0.0),
          "exec_model simulated delay must be >= 0");
  require(!initial_position || initial_position->allFinite(),
          "initial_position must be finite");
  trajectory.Validate();
  try {
    link.uplink.Validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("link.uplink ") + e.what());
  }
  try {
    link.downlink.Validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("link.downlink ") + e.what());
  }
  model.Validate();
  mpc.Validate(model.gravity);
}

double ComputeRtt(const CycleRecord& record) {
  return record.ttre + record.exec + record.tter;
}

double EuclideanError(const Vec3& p, const Vec3& p_ref) {
  return (p - p_ref).norm();
}

namespace {

Stat Describe(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding in the sum can push the mean of identical values just outside.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

}  // namespace

EpisodeSummary Summarize(const std::vector<CycleRecord>& records,
                         double transient) {
  if (records.empty()) {
    throw std::invalid_argument("cannot summarize an empty record list");
  }
  std::vector<double> ttre, exec, tter, rtt, err;
  EpisodeSummary s;
  for (const auto& r : records) {
    ttre.push_back(r.ttre);
    exec.push_back(r.exec);
    tter.push_back(r.tter);
    rtt.push_back(r.rtt);
    if (r.t >= transient) err.push_back(r.tracking_error);
    if (r.degraded) ++s.degraded_cycles;
    s.descent_ok = s.descent_ok && r.descent_ok;
  }
  s.ttre = Describe(ttre);
  s.exec = Describe(exec);
  s.tter = Describe(tter);
  s.rtt = Describe(rtt);
  s.tracking = Describe(err);
  s.cycles = records.size();
  s.tracked_cycles = err.size();
  return s;
}

namespace {

bool NonIncreasing(const std::vector<double>& costs) {
  return std::adjacent_find(costs.begin(), costs.end(),
                            [](double a, double b) { return b > a; }) ==
         costs.end();
}

// Edge-side MPC task. Solutions become visible for warm starting only once
// their (simulated or measured) execution has finished.
class Controller {
 public:
  explicit Controller(const ScenarioConfig& cfg) : cfg_(cfg) {}

  struct Activation {
    CycleRecord record;
    ControlInput command;
    SimDuration exec{0};
  };

  Activation Activate(const StampedMessage& odometry, SimTime now,
                      std::int64_t k) {
    PromoteFinished(now);
    const auto& mpc = cfg_.mpc;
    const UavState& x = std::get<UavState>(odometry.payload);
    const double t_state = ToSeconds(odometry.published);
    const double t_ref = std::min(t_state, cfg_.trajectory.duration);

    Activation out;
    CycleRecord& rec = out.record;
    rec.k = k;
    rec.t = t_state;
    rec.ttre = ToMillis(odometry.transit());
    rec.state_at_send = x;
    rec.reference = SampleReference(cfg_.trajectory, t_ref);
    rec.tracking_error =
        EuclideanError(x.position, rec.reference.state.position);
    rec.odometry_seq = odometry.seq;

    std::optional<InputSequence> warm;
    ControlInput previous = mpc.steady_input;
    if (latest_) {
      warm = ShiftInputs(latest_->inputs,
                         static_cast<int>(std::max<std::int64_t>(1, k - latest_->k)));
      previous = latest_->command;
    }
    const auto window = ReferenceWindow(
        cfg_.trajectory, std::min(t_state + mpc.dt, cfg_.trajectory.duration),
        mpc.horizon, mpc.dt);

    Finished done;
    done.k = k;
    double solve_seconds = 0.0;
    try {
      MpcSolution sol = Solve(x, window, warm, previous, mpc, cfg_.model);
      solve_seconds = sol.solve_time;
      out.command = sol.first_input;
      rec.cost = sol.cost;
      rec.iterations = sol.iterations;
      rec.descent_ok = NonIncreasing(sol.cost_history);
      done.inputs = std::move(sol.inputs);
    } catch (const SolverDivergence&) {
      out.command = previous;
      rec.degraded = true;
      rec.cost = std::numeric_limits<double>::quiet_NaN();
      done.inputs = warm ? *warm : InputSequence(mpc.horizon, mpc.steady_input);
    }
    rec.applied_input = out.command;
    done.command = out.command;

    out.exec = cfg_.exec.kind == ExecModel::Kind::kSimulated
                   ? FromMillis(cfg_.exec.simulated_ms)
                   : FromSeconds(solve_seconds);
    rec.exec = ToMillis(out.exec);
    pending_.push_back({now + out.exec, std::move(done)});
    return out;
  }

 private:
  struct Finished {
    std::int64_t k = 0;
    InputSequence inputs;
    ControlInput command;
  };

  void PromoteFinished(SimTime now) {
    while (!pending_.empty() && pending_.front().first <= now) {
      latest_ = std::move(pending_.front().second);
      pending_.pop_front();
    }
  }

  const ScenarioConfig& cfg_;
  std::optional<Finished> latest_;
  // Completion order equals activation order for a fixed execution delay;
  // with measured delays a later activation may finish first, which only
  // delays its promotion.
  std::deque<std::pair<SimTime, Finished>> pending_;
};

// Robot-side plant: RK4 at plant rate with zero-order hold on the command.
class Plant {
 public:
  explicit Plant(const ScenarioConfig& cfg) : cfg_(cfg) {
    const Vec3 start =
        cfg.initial_position
            ? *cfg.initial_position
            : SampleReference(cfg.trajectory, 0.0).state.position;
    state_.position = start;
    command_ = cfg.mpc.steady_input;
    dt_ = 1.0 / cfg.plant_rate;
  }

  void TakeCommands(const std::vector<StampedMessage>& delivered, SimTime now,
                    std::vector<CommandApplication>* log) {
    if (delivered.empty()) return;
    const StampedMessage& latest = delivered.back();
    command_ = std::get<ControlInput>(latest.payload);
    log->push_back({ToSeconds(now), ToSeconds(latest.published),
                    ToSeconds(latest.deliver), latest.seq});
  }

  void Step() { state_ = StepRk4(state_, command_, cfg_.model, dt_); }

  const UavState& state() const { return state_; }

 private:
  const ScenarioConfig& cfg_;
  UavState state_;
  ControlInput command_;
  double dt_;
};

class EpisodeRunner {
 public:
  explicit EpisodeRunner(const ScenarioConfig& cfg)
      : cfg_(cfg),
        uplink_rng_(cfg.seed, 1),
        downlink_rng_(cfg.seed, 2),
        control_period_(FromSeconds(1.0 / cfg.control_rate)),
        plant_period_(FromSeconds(1.0 / cfg.plant_rate)),
        end_(FromSeconds(cfg.duration)) {}

  EpisodeResult RunDeterministic() {
    Plant plant(cfg_);
    Controller controller(cfg_);
    EpisodeResult result;

    enum class Kind { kPlantTick, kControllerWake, kCommandReady };
    struct Event {
      SimTime time;
      std::uint64_t order;
      Kind kind;
      std::size_t record = 0;
      ControlInput command;
    };
    auto later = [](const Event& a, const Event& b) {
      return a.time != b.time ? a.time > b.time : a.order > b.order;
    };
    std::priority_queue<Event, std::vector<Event>, decltype(later)> events(later);
    std::uint64_t order = 0;
    events.push({SimTime(0), order++, Kind::kPlantTick, 0, {}});

    SimTime next_odometry(0);
    std::int64_t tick = 0;
    std::int64_t cycle = 0;
    while (!events.empty()) {
      Event ev = events.top();
      if (ev.time >= end_ && ev.kind != Kind::kCommandReady) {
        events.pop();
        continue;
      }
      events.pop();
      switch (ev.kind) {
        case Kind::kPlantTick: {
          plant.TakeCommands(bus_.PollDeliveries(Topic::kCommand, ev.time),
                             ev.time, &result.applications);
          if (ev.time >= next_odometry) {
            bus_.Publish(Topic::kOdometry, plant.state(), ev.time,
                         cfg_.link.uplink, uplink_rng_);
            events.push({bus_.LastDelivery(Topic::kOdometry), order++,
                         Kind::kControllerWake, 0, {}});
            next_odometry += control_period_;
          }
          plant.Step();
          ++tick;
          events.push({plant_period_ * tick, order++, Kind::kPlantTick, 0, {}});
          break;
        }
        case Kind::kControllerWake: {
          for (const auto& msg : bus_.PollDeliveries(Topic::kOdometry, ev.time)) {
            auto act = controller.Activate(msg, ev.time, cycle++);
            result.records.push_back(act.record);
            events.push({ev.time + act.exec, order++, Kind::kCommandReady,
                         result.records.size() - 1, act.command});
          }
          break;
        }
        case Kind::kCommandReady: {
          PublishCommand(ev.command, ev.time, &result.records[ev.record]);
          break;
        }
      }
    }
    Finish(&result);
    return result;
  }

  EpisodeResult RunRealtime() {
    EpisodeResult result;
    std::mutex records_mutex;
    std::atomic<bool> stop{false};
    const auto origin = std::chrono::steady_clock::now();
    auto now = [origin] {
      return std::chrono::duration_cast<SimTime>(
          std::chrono::steady_clock::now() - origin);
    };

    std::thread controller_task([&] {
      Controller controller(cfg_);
      std::int64_t cycle = 0;
      while (!stop.load()) {
        const SimTime t = now();
        auto delivered = bus_.PollDeliveries(Topic::kOdometry, t);
        if (delivered.empty()) {
          const auto next = bus_.NextDelivery(Topic::kOdometry);
          SimDuration wait = std::chrono::microseconds(500);
          if (next) wait = std::clamp(*next - t, SimDuration(0), wait);
          std::this_thread::sleep_for(wait);
          continue;
        }
        // Stale odometry is superseded by the newest sample.
        const StampedMessage& msg = delivered.back();
        const SimTime activated = now();
        auto act = controller.Activate(msg, activated, cycle++);
        if (cfg_.exec.kind == ExecModel::Kind::kSimulated) {
          std::this_thread::sleep_until(origin + activated + act.exec);
        }
        const SimTime published = now();
        act.record.exec = ToMillis(published - activated);
        if (stop.load()) break;
        try {
          PublishCommand(act.command, published, &act.record);
        } catch (const std::exception&) {
          break;
        }
        std::lock_guard lock(records_mutex);
        result.records.push_back(act.record);
      }
    });

    Plant plant(cfg_);
    SimTime next_odometry(0);
    for (std::int64_t tick = 0;; ++tick) {
      const SimTime scheduled = plant_period_ * tick;
      if (scheduled >= end_) break;
      std::this_thread::sleep_until(origin + scheduled);
      const SimTime t = now();
      plant.TakeCommands(bus_.PollDeliveries(Topic::kCommand, t), t,
                         &result.applications);
      if (scheduled >= next_odometry) {
        bus_.Publish(Topic::kOdometry, plant.state(), t, cfg_.link.uplink,
                     uplink_rng_);
        next_odometry += control_period_;
      }
      plant.Step();
    }
    stop.store(true);
    controller_task.join();
    Finish(&result);
    return result;
  }

 private:
  void PublishCommand(const ControlInput& command, SimTime now,
                      CycleRecord* record) {
    record->command_seq = bus_.Publish(Topic::kCommand, command, now,
                                       cfg_.link.downlink, downlink_rng_);
    record->tter = ToMillis(bus_.LastDelivery(Topic::kCommand) - now);
    record->rtt = ComputeRtt(*record);
  }

  void Finish(EpisodeResult* result) {
    for (int i = 0; i < kTopicCount; ++i) {
      const auto topic = static_cast<Topic>(i);
      result->published[i] = bus_.published_count(topic);
      result->delivered[i] = bus_.delivered_count(topic);
      result->in_flight[i] = bus_.in_flight(topic);
    }
    bus_.Close();
    if (result->records.empty()) return;
    result->summary = Summarize(result->records, cfg_.transient);
    for (const auto& r : result->records) {
      result->summary.inputs_feasible =
          result->summary.inputs_feasible &&
          WithinBounds(r.applied_input, cfg_.mpc.bounds);
    }
    result->summary.scenario = cfg_.name;
    result->summary.seed = cfg_.seed;
    result->summary.duration = cfg_.duration;
  }

  const ScenarioConfig& cfg_;
  MessageBus bus_;
  LinkRng uplink_rng_;
  LinkRng downlink_rng_;
  SimDuration control_period_;
  SimDuration plant_period_;
  SimTime end_;
};

}  // namespace

EpisodeResult RunEpisode(const ScenarioConfig& cfg) {
  cfg.Validate();
  EpisodeRunner runner(cfg);
  return cfg.mode == ClockMode::kDeterministic ? runner.RunDeterministic()
                                               : runner.RunRealtime();
}

}  // namespace edgempc
