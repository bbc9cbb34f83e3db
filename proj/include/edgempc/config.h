#ifndef EDGEMPC_CONFIG_H_
#define EDGEMPC_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "edgempc/runtime.h"

namespace edgempc {

// Built-in scenarios: circular-profile-A, circular-profile-B,
// helical-profile-A, helical-profile-B, hover-ideal.
std::vector<std::string> BuiltinScenarioNames();
// Throws std::invalid_argument for unknown names.
ScenarioConfig BuiltinScenario(std::string_view name);

// YAML scenario file. A top-level `scenario:` key selects the built-in base;
// every other key overrides it. Unknown keys are rejected. A `manifest:` block
// (as written next to run outputs) is accepted and ignored.
//
// Throws ConfigError (kIo, kSyntax, kInvalid) with the offending line.
ScenarioConfig ParseConfig(const std::filesystem::path& path);
ScenarioConfig ParseConfigText(std::string_view text);

// Metadata written into the `manifest:` block.
struct ManifestInfo {
  std::string tool_version;
  std::string source_config;
  std::string output_dir;
};

// Fully resolved configuration; ParseConfigText(EmitConfig(c)) == c.
std::string EmitConfig(const ScenarioConfig& cfg,
                       const ManifestInfo* manifest = nullptr);

}  // namespace edgempc

#endif  // EDGEMPC_CONFIG_H_
