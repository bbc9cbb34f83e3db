#include "edgempc/config.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "edgempc/errors.h"

namespace edgempc {

std::vector<std::string> BuiltinScenarioNames() {
  return {"circular-profile-A", "circular-profile-B", "helical-profile-A",
          "helical-profile-B", "hover-ideal"};
}

ScenarioConfig BuiltinScenario(std::string_view name) {
  ScenarioConfig cfg;
  cfg.name = std::string(name);
  cfg.duration = 80.0;
  cfg.trajectory.duration = 80.0;
  const auto stochastic = DelayDistribution::kLognormalWithSpikes;
  auto with_profile = [&](std::string_view profile, double exec_ms) {
    cfg.profile_name = std::string(profile);
    cfg.link = LinkPreset(profile, stochastic);
    cfg.exec = ExecModel::Simulated(exec_ms);
  };
  if (name == "circular-profile-A" || name == "helical-profile-A") {
    with_profile("profile-A", 16.1);
  } else if (name == "circular-profile-B" || name == "helical-profile-B") {
    with_profile("profile-B", 16.9);
  } else if (name == "hover-ideal") {
    cfg.profile_name = "ideal";
    cfg.link = LinkPreset("ideal", DelayDistribution::kDegenerate);
    cfg.exec = ExecModel::Simulated(0.0);
    cfg.trajectory.kind = TrajectoryKind::kSetpoint;
    cfg.trajectory.radius = 0.0;
    cfg.trajectory.angular_rate = 0.0;
    cfg.duration = 10.0;
    cfg.trajectory.duration = 10.0;
    return cfg;
  } else {
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
  }
  if (name.starts_with("helical")) {
    cfg.trajectory.kind = TrajectoryKind::kHelical;
    cfg.trajectory.climb_rate = 0.05;
  } else {
    cfg.trajectory.kind = TrajectoryKind::kCircular;
  }
  return cfg;
}

namespace {

using Kind = ConfigError::Kind;

int LineOf(const YAML::Node& node) {
  const int line = node.Mark().line;
  return line >= 0 ? line + 1 : 0;
}

class Resolver {
 public:
  ScenarioConfig Resolve(const YAML::Node& root) {
    ScenarioConfig cfg;
    if (!root || root.IsNull()) {
      Finish(&cfg);
      return cfg;
    }
    if (!root.IsMap()) {
      throw ConfigError(Kind::kInvalid, "top level must be a mapping",
                        LineOf(root));
    }
    if (const auto base = root["scenario"]) {
      const std::string name = Text(base, "scenario");
      try {
        cfg = BuiltinScenario(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(Kind::kInvalid, e.what(), LineOf(base));
      }
    }
    CheckKeys(root, "",
              {"scenario", "name", "seed", "duration", "control_rate",
               "plant_rate", "mode", "exec_model", "transient",
               "initial_position", "trajectory", "link", "model", "mpc",
               "manifest"});
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>();
      const YAML::Node& v = kv.second;
      if (key == "name") cfg.name = Text(v, key);
      if (key == "seed") cfg.seed = Get<std::uint64_t>(v, key);
      if (key == "duration") cfg.duration = Number(v, key);
      if (key == "control_rate") cfg.control_rate = Number(v, key);
      if (key == "plant_rate") cfg.plant_rate = Number(v, key);
      if (key == "transient") cfg.transient = Number(v, key);
      if (key == "initial_position") cfg.initial_position = Vector3(v, key);
      if (key == "mode") {
        cfg.mode = Convert(v, key, [](const std::string& s) {
          return ClockModeFromString(s);
        });
      }
      if (key == "exec_model") {
        cfg.exec = Convert(v, key, [](const std::string& s) {
          return ExecModelFromString(s);
        });
      }
    }
    if (const auto n = root["trajectory"]) ReadTrajectory(n, &cfg.trajectory);
    if (const auto n = root["model"]) ReadModel(n, &cfg.model);
    if (const auto n = root["link"]) ReadLink(n, &cfg);
    if (const auto n = root["mpc"]) ReadMpc(n, &cfg.mpc);
    if (const auto n = root["manifest"]) {
      CheckKeys(n, "manifest", {"tool_version", "source_config", "output_dir"});
    }
    Finish(&cfg);
    return cfg;
  }

 private:
  void Finish(ScenarioConfig* cfg) {
    if (!dt_given_ && cfg->control_rate > 0.0) {
      cfg->mpc.dt = 1.0 / cfg->control_rate;
    }
    if (!steady_given_) cfg->mpc.steady_input = {cfg->model.gravity, 0.0, 0.0};
    try {
      cfg->Validate();
    } catch (const std::logic_error& e) {
      const std::string message = e.what();
      throw ConfigError(Kind::kInvalid, message, FieldLine(message));
    }
  }

  // Line of the deepest recorded key that prefixes the message's field path.
  int FieldLine(const std::string& message) const {
    std::string path = message.substr(0, message.find(' '));
    while (!path.empty()) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      const auto dot = path.rfind('.');
      if (dot == std::string::npos) break;
      path.resize(dot);
    }
    return 0;
  }

  void CheckKeys(const YAML::Node& map, const std::string& path,
                 std::initializer_list<std::string_view> allowed) {
    if (!map.IsMap()) {
      throw ConfigError(Kind::kInvalid,
                        "'" + path + "' must be a mapping", LineOf(map));
    }
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      const std::string full = path.empty() ? key : path + "." + key;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError(Kind::kInvalid, "unknown key '" + full + "'",
                          LineOf(kv.first));
      }
      lines_[full] = LineOf(kv.first);
    }
  }

  template <typename T>
  T Get(const YAML::Node& n, const std::string& path) {
    try {
      if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      throw ConfigError(Kind::kInvalid, "'" + path + "' has the wrong type",
                        LineOf(n));
    }
  }

  double Number(const YAML::Node& n, const std::string& path) {
    return Get<double>(n, path);
  }

  std::string Text(const YAML::Node& n, const std::string& path) {
    return Get<std::string>(n, path);
  }

  template <typename F>
  std::invoke_result_t<F, const std::string&> Convert(const YAML::Node& n,
                                                     const std::string& path,
                                                     F&& parse) {
    const std::string text = Text(n, path);
    try {
      return parse(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(Kind::kInvalid, path + ": " + e.what(), LineOf(n));
    }
  }

  Eigen::VectorXd Numbers(const YAML::Node& n, const std::string& path,
                          int count) {
    if (!n.IsSequence() || static_cast<int>(n.size()) != count) {
      throw ConfigError(Kind::kInvalid,
                        "'" + path + "' must be a list of " +
                            std::to_string(count) + " numbers",
                        LineOf(n));
    }
    Eigen::VectorXd out(count);
    for (int i = 0; i < count; ++i) out(i) = Number(n[i], path);
    return out;
  }

  Vec3 Vector3(const YAML::Node& n, const std::string& path) {
    return Numbers(n, path, 3);
  }

  // A list of `dim` diagonal entries or a dim x dim nested list.
  Eigen::MatrixXd Weight(const YAML::Node& n, const std::string& path,
                         int dim) {
    if (n.IsSequence() && n.size() > 0 && n[0].IsSequence()) {
      if (static_cast<int>(n.size()) != dim) {
        throw ConfigError(Kind::kInvalid,
                          "'" + path + "' must have " + std::to_string(dim) +
                              " rows",
                          LineOf(n));
      }
      Eigen::MatrixXd m(dim, dim);
      for (int r = 0; r < dim; ++r) m.row(r) = Numbers(n[r], path, dim);
      return m;
    }
    return Numbers(n, path, dim).asDiagonal();
  }

  void ReadTrajectory(const YAML::Node& n, TrajectorySpec* t) {
    CheckKeys(n, "trajectory",
              {"kind", "center", "radius", "angular_rate", "climb_rate",
               "start_altitude", "duration", "phase"});
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      const std::string path = "trajectory." + key;
      const YAML::Node& v = kv.second;
      if (key == "kind") {
        t->kind = Convert(v, path, [](const std::string& s) {
          return TrajectoryKindFromString(s);
        });
      }
      if (key == "center") t->center = Vector3(v, path);
      if (key == "radius") t->radius = Number(v, path);
      if (key == "angular_rate") t->angular_rate = Number(v, path);
      if (key == "climb_rate") t->climb_rate = Number(v, path);
      if (key == "start_altitude") t->start_altitude = Number(v, path);
      if (key == "duration") t->duration = Number(v, path);
      if (key == "phase") t->phase = Number(v, path);
    }
  }

  void ReadModel(const YAML::Node& n, ModelParams* m) {
    CheckKeys(n, "model",
              {"gravity", "damping", "roll_gain", "pitch_gain",
               "roll_time_constant", "pitch_time_constant",
               "attitude_margin"});
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      const std::string path = "model." + key;
      const YAML::Node& v = kv.second;
      if (key == "gravity") m->gravity = Number(v, path);
      if (key == "damping") m->damping = Vector3(v, path);
      if (key == "roll_gain") m->roll_gain = Number(v, path);
      if (key == "pitch_gain") m->pitch_gain = Number(v, path);
      if (key == "roll_time_constant") m->roll_time_constant = Number(v, path);
      if (key == "pitch_time_constant") m->pitch_time_constant = Number(v, path);
      if (key == "attitude_margin") m->attitude_margin = Number(v, path);
    }
  }

  void ReadProfile(const YAML::Node& n, const std::string& path,
                   LatencyProfile* p) {
    CheckKeys(n, path,
              {"mean", "jitter_std", "spike_prob", "spike_scale", "floor",
               "distribution"});
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      const std::string full = path + "." + key;
      const YAML::Node& v = kv.second;
      if (key == "mean") p->mean = Number(v, full);
      if (key == "jitter_std") p->jitter_std = Number(v, full);
      if (key == "spike_prob") p->spike_prob = Number(v, full);
      if (key == "spike_scale") p->spike_scale = Number(v, full);
      if (key == "floor") p->floor = Number(v, full);
      if (key == "distribution") {
        p->distribution = Convert(v, full, [](const std::string& s) {
          return DelayDistributionFromString(s);
        });
      }
    }
  }

  void ReadLink(const YAML::Node& n, ScenarioConfig* cfg) {
    CheckKeys(n, "link", {"profile", "distribution", "uplink", "downlink"});
    const auto profile = n["profile"];
    const auto distribution = n["distribution"];
    if (profile || distribution) {
      const std::string name =
          profile ? Text(profile, "link.profile") : cfg->profile_name;
      DelayDistribution dist = cfg->link.uplink.distribution;
      if (distribution) {
        dist = Convert(distribution, "link.distribution",
                       [](const std::string& s) {
                         return DelayDistributionFromString(s);
                       });
      }
      try {
        cfg->link = LinkPreset(name, dist);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(Kind::kInvalid, e.what(),
                          LineOf(profile ? profile : distribution));
      }
      cfg->profile_name = name;
    }
    if (const auto up = n["uplink"]) {
      ReadProfile(up, "link.uplink", &cfg->link.uplink);
    }
    if (const auto down = n["downlink"]) {
      ReadProfile(down, "link.downlink", &cfg->link.downlink);
    }
  }

  void ReadMpc(const YAML::Node& n, MpcConfig* m) {
    CheckKeys(n, "mpc",
              {"horizon", "dt", "state_weight", "input_weight", "rate_weight",
               "steady_input", "bounds", "solver"});
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      const std::string path = "mpc." + key;
      const YAML::Node& v = kv.second;
      if (key == "horizon") m->horizon = Get<int>(v, path);
      if (key == "dt") {
        m->dt = Number(v, path);
        dt_given_ = true;
      }
      if (key == "state_weight") m->state_weight = Weight(v, path, 8);
      if (key == "input_weight") m->input_weight = Weight(v, path, 3);
      if (key == "rate_weight") m->rate_weight = Weight(v, path, 3);
      if (key == "steady_input") {
        m->steady_input = ControlInput::FromVector(Vector3(v, path));
        steady_given_ = true;
      }
      if (key == "bounds") {
        CheckKeys(v, path, {"thrust_max", "roll_max", "pitch_max"});
        for (const auto& b : v) {
          const std::string bkey = b.first.as<std::string>();
          const double value = Number(b.second, path + "." + bkey);
          if (bkey == "thrust_max") m->bounds.thrust_max = value;
          if (bkey == "roll_max") m->bounds.roll_max = value;
          if (bkey == "pitch_max") m->bounds.pitch_max = value;
        }
      }
      if (key == "solver") {
        CheckKeys(v, path,
                  {"step_rule", "max_iterations", "tolerance", "initial_step",
                   "backtrack_factor", "armijo_slope", "max_backtracks"});
        auto& s = m->solver;
        for (const auto& b : v) {
          const std::string skey = b.first.as<std::string>();
          const std::string full = path + "." + skey;
          if (skey == "step_rule") {
            s.step_rule = Convert(b.second, full, [](const std::string& r) {
              return StepRuleFromString(r);
            });
          }
          if (skey == "max_iterations") s.max_iterations = Get<int>(b.second, full);
          if (skey == "tolerance") s.tolerance = Number(b.second, full);
          if (skey == "initial_step") s.initial_step = Number(b.second, full);
          if (skey == "backtrack_factor") s.backtrack_factor = Number(b.second, full);
          if (skey == "armijo_slope") s.armijo_slope = Number(b.second, full);
          if (skey == "max_backtracks") s.max_backtracks = Get<int>(b.second, full);
        }
      }
    }
  }

  std::map<std::string, int> lines_;
  bool dt_given_ = false;
  bool steady_given_ = false;
};

// Shortest representation that parses back to the same double.
std::string Num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void EmitVector(YAML::Emitter& out, const Eigen::Ref<const Eigen::VectorXd>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << Num(v(i));
  out << YAML::EndSeq;
}

void EmitWeight(YAML::Emitter& out, const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd off = m - Eigen::MatrixXd(m.diagonal().asDiagonal());
  if (off.isZero(0.0)) {
    EmitVector(out, m.diagonal());
    return;
  }
  out << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) EmitVector(out, m.row(r).transpose());
  out << YAML::EndSeq;
}

void EmitProfile(YAML::Emitter& out, const LatencyProfile& p) {
  out << YAML::BeginMap;
  out << YAML::Key << "mean" << YAML::Value << Num(p.mean);
  out << YAML::Key << "jitter_std" << YAML::Value << Num(p.jitter_std);
  out << YAML::Key << "spike_prob" << YAML::Value << Num(p.spike_prob);
  out << YAML::Key << "spike_scale" << YAML::Value << Num(p.spike_scale);
  out << YAML::Key << "floor" << YAML::Value << Num(p.floor);
  out << YAML::Key << "distribution" << YAML::Value
      << std::string(ToString(p.distribution));
  out << YAML::EndMap;
}

}  // namespace

ScenarioConfig ParseConfigText(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(Kind::kSyntax, e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  return Resolver().Resolve(root);
}

ScenarioConfig ParseConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(Kind::kIo,
                      "cannot open config file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigText(buffer.str());
}

std::string EmitConfig(const ScenarioConfig& cfg, const ManifestInfo* manifest) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "duration" << YAML::Value << Num(cfg.duration);
  out << YAML::Key << "control_rate" << YAML::Value << Num(cfg.control_rate);
  out << YAML::Key << "plant_rate" << YAML::Value << Num(cfg.plant_rate);
  out << YAML::Key << "mode" << YAML::Value << std::string(ToString(cfg.mode));
  out << YAML::Key << "exec_model" << YAML::Value << ToString(cfg.exec);
  out << YAML::Key << "transient" << YAML::Value << Num(cfg.transient);
  if (cfg.initial_position) {
    out << YAML::Key << "initial_position" << YAML::Value;
    EmitVector(out, *cfg.initial_position);
  }

  const auto& t = cfg.trajectory;
  out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(ToString(t.kind));
  out << YAML::Key << "center" << YAML::Value;
  EmitVector(out, t.center);
  out << YAML::Key << "radius" << YAML::Value << Num(t.radius);
  out << YAML::Key << "angular_rate" << YAML::Value << Num(t.angular_rate);
  out << YAML::Key << "climb_rate" << YAML::Value << Num(t.climb_rate);
  out << YAML::Key << "start_altitude" << YAML::Value << Num(t.start_altitude);
  out << YAML::Key << "duration" << YAML::Value << Num(t.duration);
  out << YAML::Key << "phase" << YAML::Value << Num(t.phase);
  out << YAML::EndMap;

  // The preset name is echoed for reference; the explicit profiles below
  // are what a re-parse applies.
  out << YAML::Key << "link" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "profile" << YAML::Value << cfg.profile_name;
  out << YAML::Key << "uplink" << YAML::Value;
  EmitProfile(out, cfg.link.uplink);
  out << YAML::Key << "downlink" << YAML::Value;
  EmitProfile(out, cfg.link.downlink);
  out << YAML::EndMap;

  const auto& m = cfg.model;
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gravity" << YAML::Value << Num(m.gravity);
  out << YAML::Key << "damping" << YAML::Value;
  EmitVector(out, m.damping);
  out << YAML::Key << "roll_gain" << YAML::Value << Num(m.roll_gain);
  out << YAML::Key << "pitch_gain" << YAML::Value << Num(m.pitch_gain);
  out << YAML::Key << "roll_time_constant" << YAML::Value
      << Num(m.roll_time_constant);
  out << YAML::Key << "pitch_time_constant" << YAML::Value
      << Num(m.pitch_time_constant);
  out << YAML::Key << "attitude_margin" << YAML::Value << Num(m.attitude_margin);
  out << YAML::EndMap;

  const auto& c = cfg.mpc;
  out << YAML::Key << "mpc" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon" << YAML::Value << c.horizon;
  out << YAML::Key << "dt" << YAML::Value << Num(c.dt);
  out << YAML::Key << "state_weight" << YAML::Value;
  EmitWeight(out, c.state_weight);
  out << YAML::Key << "input_weight" << YAML::Value;
  EmitWeight(out, c.input_weight);
  out << YAML::Key << "rate_weight" << YAML::Value;
  EmitWeight(out, c.rate_weight);
  out << YAML::Key << "steady_input" << YAML::Value;
  EmitVector(out, c.steady_input.ToVector());
  out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "thrust_max" << YAML::Value << Num(c.bounds.thrust_max);
  out << YAML::Key << "roll_max" << YAML::Value << Num(c.bounds.roll_max);
  out << YAML::Key << "pitch_max" << YAML::Value << Num(c.bounds.pitch_max);
  out << YAML::EndMap;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "step_rule" << YAML::Value
      << std::string(ToString(c.solver.step_rule));
  out << YAML::Key << "max_iterations" << YAML::Value << c.solver.max_iterations;
  out << YAML::Key << "tolerance" << YAML::Value << Num(c.solver.tolerance);
  out << YAML::Key << "initial_step" << YAML::Value << Num(c.solver.initial_step);
  out << YAML::Key << "backtrack_factor" << YAML::Value
      << Num(c.solver.backtrack_factor);
  out << YAML::Key << "armijo_slope" << YAML::Value << Num(c.solver.armijo_slope);
  out << YAML::Key << "max_backtracks" << YAML::Value << c.solver.max_backtracks;
  out << YAML::EndMap;
  out << YAML::EndMap;

  if (manifest) {
    out << YAML::Key << "manifest" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tool_version" << YAML::Value << manifest->tool_version;
    out << YAML::Key << "source_config" << YAML::Value << manifest->source_config;
    out << YAML::Key << "output_dir" << YAML::Value << manifest->output_dir;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace edgempc
