#ifndef EDGEMPC_CLI_H_
#define EDGEMPC_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "edgempc/runtime.h"

namespace edgempc {

inline constexpr const char* kToolVersion = "0.3.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

struct RunManifest {
  std::string config_path;  // empty for built-in scenarios
  ScenarioConfig config;
  std::filesystem::path output_dir;
  std::string tool_version = kToolVersion;
};

// Runs the episode and writes manifest.yaml, trace.csv, summary.txt,
// trajectory3d.dat, delays.dat and error.dat into output_dir. Prints the
// summary to `out`. Returns an exit code.
int RunScenario(const RunManifest& manifest, std::ostream& out,
                std::ostream& err);

// Command-line entry point.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace edgempc

#endif  // EDGEMPC_CLI_H_
