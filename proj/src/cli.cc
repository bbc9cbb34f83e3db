#include "edgempc/cli.h"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "edgempc/config.h"
#include "edgempc/errors.h"
#include "edgempc/trace_io.h"

namespace edgempc {

namespace {

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <typename Writer>
void WriteRecords(const std::filesystem::path& path,
                  const std::vector<CycleRecord>& records, Writer write) {
  std::ostringstream buffer;
  write(buffer, records);
  WriteFile(path, buffer.str());
}

}  // namespace

int RunScenario(const RunManifest& manifest, std::ostream& out,
                std::ostream& err) {
  const auto& dir = manifest.output_dir;
  try {
    std::filesystem::create_directories(dir);
    const ManifestInfo info{manifest.tool_version, manifest.config_path,
                            dir.string()};
    WriteFile(dir / "manifest.yaml", EmitConfig(manifest.config, &info));

    const EpisodeResult result = RunEpisode(manifest.config);
    if (result.records.empty()) {
      err << "error: episode produced no control cycles\n";
      return kExitRuntimeError;
    }
    WriteRecords(dir / "trace.csv", result.records, WriteTraceCsv);
    WriteRecords(dir / "trajectory3d.dat", result.records, WriteTrajectoryDat);
    WriteRecords(dir / "delays.dat", result.records, WriteDelaysDat);
    WriteRecords(dir / "error.dat", result.records, WriteErrorDat);
    const std::string summary = FormatSummary(result.summary);
    WriteFile(dir / "summary.txt", summary);
    out << summary;
    if (result.summary.degraded_cycles > 0) {
      err << "warning: " << result.summary.degraded_cycles
          << " cycles held the previous command after solver divergence\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Closed-loop edge MPC laboratory for a quadrotor UAV", "edgempc"};
  app.set_version_flag("--version", kToolVersion);

  std::string config_path, scenario, profile, delays, exec_model, mode;
  std::string out_dir = "edgempc-out";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration, rate;
  std::optional<int> horizon;
  bool list = false, print_config = false;

  auto* config_opt = app.add_option("--config", config_path, "Scenario YAML file");
  auto* scenario_opt =
      app.add_option("--scenario", scenario, "Built-in scenario name");
  config_opt->excludes(scenario_opt);
  app.add_option("--seed", seed, "Random seed for link delays");
  app.add_option("--duration", duration, "Episode duration, s");
  app.add_option("--rate", rate, "Control rate, Hz (also sets the MPC step)");
  app.add_option("--horizon", horizon, "MPC prediction horizon, steps");
  app.add_option("--profile", profile, "Latency preset: ideal, profile-A, profile-B");
  app.add_option("--delays", delays, "Delay distribution: degenerate or lognormal-with-spikes");
  app.add_option("--exec-model", exec_model, "measured or simulated:MS");
  app.add_option("--mode", mode, "deterministic or realtime");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--list-scenarios", list, "List built-in scenarios and exit");
  app.add_flag("--print-config", print_config,
               "Print the resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (list) {
    for (const auto& name : BuiltinScenarioNames()) out << name << '\n';
    return kExitOk;
  }

  RunManifest manifest;
  try {
    if (!config_path.empty()) {
      manifest.config = ParseConfig(config_path);
      manifest.config_path = config_path;
    } else if (!scenario.empty()) {
      manifest.config = BuiltinScenario(scenario);
    } else {
      err << "error: one of --config or --scenario is required\n";
      return kExitConfigError;
    }
    ScenarioConfig& cfg = manifest.config;
    if (seed) cfg.seed = *seed;
    if (duration) cfg.duration = *duration;
    if (rate) {
      cfg.control_rate = *rate;
      cfg.mpc.dt = 1.0 / *rate;
      cfg.plant_rate = std::max(cfg.plant_rate, *rate);
    }
    if (horizon) cfg.mpc.horizon = *horizon;
    if (!profile.empty() || !delays.empty()) {
      const std::string name = profile.empty() ? cfg.profile_name : profile;
      const DelayDistribution dist = delays.empty()
                                         ? cfg.link.uplink.distribution
                                         : DelayDistributionFromString(delays);
      cfg.link = LinkPreset(name, dist);
      cfg.profile_name = name;
    }
    if (!exec_model.empty()) cfg.exec = ExecModelFromString(exec_model);
    if (!mode.empty()) cfg.mode = ClockModeFromString(mode);
    cfg.Validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (print_config) {
    out << EmitConfig(manifest.config);
    return kExitOk;
  }
  manifest.output_dir = out_dir;
  return RunScenario(manifest, out, err);
}

}  // namespace edgempc
