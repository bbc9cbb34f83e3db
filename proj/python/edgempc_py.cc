#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgempc/cli.h"
#include "edgempc/config.h"
#include "edgempc/dynamics.h"
#include "edgempc/errors.h"
#include "edgempc/mpc.h"
#include "edgempc/netsim.h"
#include "edgempc/reference.h"
#include "edgempc/runtime.h"
#include "edgempc/trace_io.h"

namespace py = pybind11;
using namespace edgempc;

namespace {

py::dict StatDict(const Stat& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["std"] = s.std;
  d["min"] = s.min;
  d["max"] = s.max;
  return d;
}

}  // namespace

PYBIND11_MODULE(edgempc, m) {
  m.doc() = "Delay-aware MPC loop simulator for an edge-offloaded UAV";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ModelDomainError>(m, "ModelDomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<LifecycleError>(m, "LifecycleError", PyExc_RuntimeError);
  py::register_exception<SolverDivergence>(m, "SolverDivergence", PyExc_ArithmeticError);

  py::class_<UavState>(m, "UavState")
      .def(py::init<>())
      .def(py::init([](const Vec3& p, const Vec3& v, double roll, double pitch) {
             return UavState{p, v, roll, pitch};
           }),
           py::arg("position"), py::arg("velocity") = Vec3::Zero(),
           py::arg("roll") = 0.0, py::arg("pitch") = 0.0)
      .def_readwrite("position", &UavState::position)
      .def_readwrite("velocity", &UavState::velocity)
      .def_readwrite("roll", &UavState::roll)
      .def_readwrite("pitch", &UavState::pitch)
      .def("to_vector", &UavState::ToVector)
      .def_static("from_vector", &UavState::FromVector)
      .def(py::self == py::self)
      .def("__repr__", [](const UavState& s) {
        std::ostringstream os;
        os << "UavState(position=[" << s.position.transpose() << "], velocity=["
           << s.velocity.transpose() << "], roll=" << s.roll
           << ", pitch=" << s.pitch << ")";
        return os.str();
      });

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<>())
      .def(py::init([](double t, double r, double p) { return ControlInput{t, r, p}; }),
           py::arg("thrust"), py::arg("roll_ref") = 0.0, py::arg("pitch_ref") = 0.0)
      .def_readwrite("thrust", &ControlInput::thrust)
      .def_readwrite("roll_ref", &ControlInput::roll_ref)
      .def_readwrite("pitch_ref", &ControlInput::pitch_ref)
      .def("to_vector", &ControlInput::ToVector)
      .def(py::self == py::self)
      .def("__repr__", [](const ControlInput& u) {
        std::ostringstream os;
        os << "ControlInput(thrust=" << u.thrust << ", roll_ref=" << u.roll_ref
           << ", pitch_ref=" << u.pitch_ref << ")";
        return os.str();
      });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("gravity", &ModelParams::gravity)
      .def_readwrite("damping", &ModelParams::damping)
      .def_readwrite("roll_gain", &ModelParams::roll_gain)
      .def_readwrite("pitch_gain", &ModelParams::pitch_gain)
      .def_readwrite("roll_time_constant", &ModelParams::roll_time_constant)
      .def_readwrite("pitch_time_constant", &ModelParams::pitch_time_constant)
      .def_readwrite("attitude_margin", &ModelParams::attitude_margin)
      .def("validate", &ModelParams::Validate);

  m.def("state_derivative",
        [](const UavState& x, const ControlInput& u, const ModelParams& p) {
          const auto d = ComputeStateDerivative(x, u, p);
          Eigen::Matrix<double, 8, 1> out;
          out << d.position_rate, d.velocity_rate, d.roll_rate, d.pitch_rate;
          return out;
        },
        py::arg("x"), py::arg("u"), py::arg("params") = ModelParams{});
  m.def("step_euler", &StepEuler, py::arg("x"), py::arg("u"),
        py::arg("params"), py::arg("dt"));
  m.def("step_rk4", &StepRk4, py::arg("x"), py::arg("u"), py::arg("params"),
        py::arg("dt"));

  py::enum_<StepRule>(m, "StepRule")
      .value("FIXED", StepRule::kFixed)
      .value("BARZILAI_BORWEIN", StepRule::kBarzilaiBorwein);

  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_readwrite("step_rule", &SolverSettings::step_rule)
      .def_readwrite("max_iterations", &SolverSettings::max_iterations)
      .def_readwrite("tolerance", &SolverSettings::tolerance)
      .def_readwrite("initial_step", &SolverSettings::initial_step)
      .def_readwrite("backtrack_factor", &SolverSettings::backtrack_factor)
      .def_readwrite("armijo_slope", &SolverSettings::armijo_slope)
      .def_readwrite("max_backtracks", &SolverSettings::max_backtracks);

  py::class_<InputBounds>(m, "InputBounds")
      .def(py::init<>())
      .def_readwrite("thrust_max", &InputBounds::thrust_max)
      .def_readwrite("roll_max", &InputBounds::roll_max)
      .def_readwrite("pitch_max", &InputBounds::pitch_max);

  py::class_<MpcConfig>(m, "MpcConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &MpcConfig::horizon)
      .def_readwrite("dt", &MpcConfig::dt)
      .def_readwrite("state_weight", &MpcConfig::state_weight)
      .def_readwrite("input_weight", &MpcConfig::input_weight)
      .def_readwrite("rate_weight", &MpcConfig::rate_weight)
      .def_readwrite("steady_input", &MpcConfig::steady_input)
      .def_readwrite("bounds", &MpcConfig::bounds)
      .def_readwrite("solver", &MpcConfig::solver)
      .def("validate", &MpcConfig::Validate, py::arg("gravity") = 9.81);

  py::class_<ReferencePoint>(m, "ReferencePoint")
      .def(py::init<>())
      .def(py::init([](const UavState& s) { return ReferencePoint{s}; }))
      .def_readwrite("state", &ReferencePoint::state);

  py::class_<MpcSolution>(m, "MpcSolution")
      .def_readonly("inputs", &MpcSolution::inputs)
      .def_readonly("first_input", &MpcSolution::first_input)
      .def_readonly("cost", &MpcSolution::cost)
      .def_readonly("iterations", &MpcSolution::iterations)
      .def_readonly("solve_time", &MpcSolution::solve_time)
      .def_readonly("converged", &MpcSolution::converged)
      .def_readonly("cost_history", &MpcSolution::cost_history);

  m.def("predict", &Predict, py::arg("x0"), py::arg("inputs"), py::arg("cfg"),
        py::arg("params") = ModelParams{});
  m.def("total_cost", &TotalCost, py::arg("x0"), py::arg("inputs"),
        py::arg("reference"), py::arg("previous_input"), py::arg("cfg"),
        py::arg("params") = ModelParams{});
  m.def("cost_gradient", &CostGradient, py::arg("x0"), py::arg("inputs"),
        py::arg("reference"), py::arg("previous_input"), py::arg("cfg"),
        py::arg("params") = ModelParams{});
  m.def("solve", &Solve, py::arg("x0"), py::arg("reference"),
        py::arg("warm_start") = std::nullopt, py::arg("previous_input"),
        py::arg("cfg"), py::arg("params") = ModelParams{});
  m.def("project_input", &ProjectInput, py::arg("u"), py::arg("bounds"));
  m.def("shift_inputs", &ShiftInputs, py::arg("inputs"), py::arg("steps") = 1);

  py::enum_<TrajectoryKind>(m, "TrajectoryKind")
      .value("SETPOINT", TrajectoryKind::kSetpoint)
      .value("CIRCULAR", TrajectoryKind::kCircular)
      .value("HELICAL", TrajectoryKind::kHelical);

  py::class_<TrajectorySpec>(m, "TrajectorySpec")
      .def(py::init<>())
      .def_readwrite("kind", &TrajectorySpec::kind)
      .def_readwrite("center", &TrajectorySpec::center)
      .def_readwrite("radius", &TrajectorySpec::radius)
      .def_readwrite("angular_rate", &TrajectorySpec::angular_rate)
      .def_readwrite("climb_rate", &TrajectorySpec::climb_rate)
      .def_readwrite("start_altitude", &TrajectorySpec::start_altitude)
      .def_readwrite("duration", &TrajectorySpec::duration)
      .def_readwrite("phase", &TrajectorySpec::phase);

  m.def("sample_reference", &SampleReference, py::arg("spec"), py::arg("t"));
  m.def("reference_window", &ReferenceWindow, py::arg("spec"), py::arg("t"),
        py::arg("count"), py::arg("dt"));

  py::enum_<DelayDistribution>(m, "DelayDistribution")
      .value("DEGENERATE", DelayDistribution::kDegenerate)
      .value("LOGNORMAL_WITH_SPIKES", DelayDistribution::kLognormalWithSpikes);

  py::class_<LatencyProfile>(m, "LatencyProfile")
      .def(py::init<>())
      .def_readwrite("mean", &LatencyProfile::mean)
      .def_readwrite("jitter_std", &LatencyProfile::jitter_std)
      .def_readwrite("spike_prob", &LatencyProfile::spike_prob)
      .def_readwrite("spike_scale", &LatencyProfile::spike_scale)
      .def_readwrite("floor", &LatencyProfile::floor)
      .def_readwrite("distribution", &LatencyProfile::distribution)
      .def_static("degenerate", &LatencyProfile::Degenerate)
      .def_static("stochastic", &LatencyProfile::Stochastic);

  m.def("sample_delays",
        [](const LatencyProfile& p, std::size_t count, std::uint64_t seed) {
          p.Validate();
          LinkRng rng(seed);
          std::vector<double> out(count);
          for (auto& x : out) x = SampleDelay(p, rng);
          return out;
        },
        py::arg("profile"), py::arg("count"), py::arg("seed") = 1,
        "Draws `count` one-way delays in ms.");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("trajectory", &ScenarioConfig::trajectory)
      .def_readwrite("control_rate", &ScenarioConfig::control_rate)
      .def_readwrite("plant_rate", &ScenarioConfig::plant_rate)
      .def_readwrite("mpc", &ScenarioConfig::mpc)
      .def_readwrite("model", &ScenarioConfig::model)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("duration", &ScenarioConfig::duration)
      .def_readwrite("transient", &ScenarioConfig::transient)
      .def_property(
          "uplink", [](const ScenarioConfig& c) { return c.link.uplink; },
          [](ScenarioConfig& c, const LatencyProfile& p) { c.link.uplink = p; })
      .def_property(
          "downlink", [](const ScenarioConfig& c) { return c.link.downlink; },
          [](ScenarioConfig& c, const LatencyProfile& p) { c.link.downlink = p; })
      .def_property(
          "exec_model", [](const ScenarioConfig& c) { return ToString(c.exec); },
          [](ScenarioConfig& c, const std::string& s) { c.exec = ExecModelFromString(s); })
      .def_property(
          "mode", [](const ScenarioConfig& c) { return std::string(ToString(c.mode)); },
          [](ScenarioConfig& c, const std::string& s) { c.mode = ClockModeFromString(s); })
      .def("validate", &ScenarioConfig::Validate)
      .def("to_yaml", [](const ScenarioConfig& c) { return EmitConfig(c); })
      .def(py::self == py::self);

  m.def("builtin_scenario_names", &BuiltinScenarioNames);
  m.def("builtin_scenario", &BuiltinScenario, py::arg("name"));
  m.def("parse_config_text", &ParseConfigText, py::arg("text"));
  m.def("parse_config", [](const std::string& path) { return ParseConfig(path); },
        py::arg("path"));

  py::class_<CycleRecord>(m, "CycleRecord")
      .def_readonly("k", &CycleRecord::k)
      .def_readonly("t", &CycleRecord::t)
      .def_readonly("ttre", &CycleRecord::ttre)
      .def_readonly("exec", &CycleRecord::exec)
      .def_readonly("tter", &CycleRecord::tter)
      .def_readonly("rtt", &CycleRecord::rtt)
      .def_readonly("state_at_send", &CycleRecord::state_at_send)
      .def_readonly("applied_input", &CycleRecord::applied_input)
      .def_readonly("reference", &CycleRecord::reference)
      .def_readonly("tracking_error", &CycleRecord::tracking_error)
      .def_readonly("cost", &CycleRecord::cost)
      .def_readonly("iterations", &CycleRecord::iterations)
      .def_readonly("degraded", &CycleRecord::degraded)
      .def_readonly("descent_ok", &CycleRecord::descent_ok);

  m.def("compute_rtt", &ComputeRtt, py::arg("record"));
  m.def("euclidean_error", &EuclideanError, py::arg("p"), py::arg("p_ref"));

  m.def("run_episode",
        [](const ScenarioConfig& cfg) {
          EpisodeResult result;
          {
            py::gil_scoped_release release;
            result = RunEpisode(cfg);
          }
          const auto& s = result.summary;
          py::dict summary;
          summary["ttre"] = StatDict(s.ttre);
          summary["exec"] = StatDict(s.exec);
          summary["tter"] = StatDict(s.tter);
          summary["rtt"] = StatDict(s.rtt);
          summary["tracking"] = StatDict(s.tracking);
          summary["cycles"] = s.cycles;
          summary["tracked_cycles"] = s.tracked_cycles;
          summary["degraded_cycles"] = s.degraded_cycles;
          summary["descent_ok"] = s.descent_ok;
          summary["inputs_feasible"] = s.inputs_feasible;
          summary["scenario"] = s.scenario;
          summary["seed"] = s.seed;
          summary["duration"] = s.duration;
          return py::make_tuple(result.records, summary);
        },
        py::arg("cfg"), "Returns (records, summary).");

  m.def("trace_csv",
        [](const std::vector<CycleRecord>& records) {
          std::ostringstream os;
          WriteTraceCsv(os, records);
          return os.str();
        },
        py::arg("records"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<std::string> all{"edgempc"};
          all.insert(all.end(), args.begin(), args.end());
          std::vector<const char*> argv;
          for (const auto& a : all) argv.push_back(a.c_str());
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");
}
