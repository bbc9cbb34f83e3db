#include "edgempc/config.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "edgempc/cli.h"
#include "edgempc/errors.h"
#include "edgempc/trace_io.h"

namespace edgempc {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("edgempc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConfigError ExpectConfigError(const std::string& text) {
  try {
    ParseConfigText(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError(ConfigError::Kind::kIo, "unreachable");
}

int Cli(std::vector<std::string> args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  args.insert(args.begin(), "edgempc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

TEST(ConfigTest, ScenarioOnlyIsFullyDefaulted) {
  const auto cfg = ParseConfigText("scenario: helical-profile-A\n");
  EXPECT_EQ(cfg, BuiltinScenario("helical-profile-A"));
  EXPECT_EQ(cfg.link.uplink.mean, 14.2);
  EXPECT_EQ(cfg.link.downlink.mean, 17.6);
  EXPECT_EQ(cfg.exec, ExecModel::Simulated(16.1));
  EXPECT_EQ(cfg.trajectory.kind, TrajectoryKind::kHelical);
  EXPECT_EQ(cfg.duration, 80.0);
  EXPECT_EQ(cfg.control_rate, 100.0);
  EXPECT_EQ(cfg.mpc.horizon, 100);
}

TEST(ConfigTest, BuiltinsAreValid) {
  ASSERT_EQ(BuiltinScenarioNames().size(), 5u);
  for (const auto& name : BuiltinScenarioNames()) {
    EXPECT_NO_THROW(BuiltinScenario(name).Validate()) << name;
  }
  EXPECT_EQ(BuiltinScenario("helical-profile-B").exec, ExecModel::Simulated(16.9));
  EXPECT_THROW(BuiltinScenario("square"), std::invalid_argument);
}

TEST(ConfigTest, OverridesApply) {
  const auto cfg = ParseConfigText(
      "scenario: circular-profile-B\n"
      "seed: 17\n"
      "link:\n"
      "  distribution: degenerate\n"
      "mpc:\n"
      "  horizon: 20\n"
      "  rate_weight: [1, 2, 3]\n"
      "  solver:\n"
      "    step_rule: fixed\n");
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.link.uplink, LatencyProfile::Degenerate(9.5));
  EXPECT_EQ(cfg.mpc.horizon, 20);
  EXPECT_EQ(cfg.mpc.rate_weight.diagonal(), Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(cfg.mpc.solver.step_rule, StepRule::kFixed);
}

TEST(ConfigTest, ControlRateZeroNamesFieldAndLine) {
  const auto e = ExpectConfigError("scenario: hover-ideal\nseed: 3\ncontrol_rate: 0\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::kInvalid);
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("control_rate"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
}

TEST(ConfigTest, NestedInvalidValueNamesField) {
  const auto e = ExpectConfigError(
      "scenario: hover-ideal\nmpc:\n  bounds:\n    thrust_max: 5\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::kInvalid);
  EXPECT_NE(std::string(e.what()).find("thrust_max"), std::string::npos);
  EXPECT_EQ(e.line(), 4);
}

TEST(ConfigTest, UnknownKeyRejected) {
  const auto e = ExpectConfigError("scenario: hover-ideal\ntrajectory:\n  radus: 3\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::kInvalid);
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("radus"), std::string::npos);
}

TEST(ConfigTest, WrongTypeRejected) {
  const auto e = ExpectConfigError("mpc:\n  horizon: many\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::kInvalid);
  EXPECT_EQ(e.line(), 2);
}

TEST(ConfigTest, SyntaxErrorHasLine) {
  const auto e = ExpectConfigError("scenario: hover-ideal\nmpc:\n  horizon: [1, 2\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::kSyntax);
  EXPECT_GT(e.line(), 0);
}

TEST(ConfigTest, MissingFileIsIoError) {
  try {
    ParseConfig("/nonexistent/edgempc.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::kIo);
  }
}

TEST(ConfigTest, EmitParseRoundTrip) {
  for (const auto& name : BuiltinScenarioNames()) {
    ScenarioConfig cfg = BuiltinScenario(name);
    cfg.seed = 123456789012345ull;
    cfg.mpc.dt = 1.0 / 3.0;
    cfg.trajectory.phase = 0.1 + 0.2;
    cfg.link.uplink.jitter_std = 1e-17;
    cfg.initial_position = Vec3(0.1, -0.7, 1.0 / 7.0);
    cfg.mpc.state_weight(0, 1) = cfg.mpc.state_weight(1, 0) = 0.5;
    const ScenarioConfig back = ParseConfigText(EmitConfig(cfg));
    EXPECT_EQ(back, cfg) << name;
  }
  ManifestInfo info{"0.3.0", "a.yaml", "out"};
  const ScenarioConfig cfg = BuiltinScenario("hover-ideal");
  EXPECT_EQ(ParseConfigText(EmitConfig(cfg, &info)), cfg);
}

TEST(TraceTest, CsvReadBackIsLossless) {
  ScenarioConfig cfg = BuiltinScenario("circular-profile-A");
  cfg.duration = 0.5;
  const auto result = RunEpisode(cfg);
  std::stringstream ss;
  WriteTraceCsv(ss, result.records);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1,
            static_cast<long>(TraceColumns().size()));
  ss.seekg(0);
  const auto back = ReadTraceCsv(ss);
  ASSERT_EQ(back.size(), result.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i], result.records[i]) << "row " << i;
  }
}

TEST(TraceTest, MalformedRowReportsLine) {
  std::stringstream ss;
  WriteTraceCsv(ss, {});
  ss << "1,2,3\n";
  try {
    ReadTraceCsv(ss);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(Cli({"--version"}), kExitOk);
  std::string out;
  EXPECT_EQ(Cli({"--list-scenarios"}, &out), kExitOk);
  EXPECT_NE(out.find("helical-profile-B"), std::string::npos);
  EXPECT_EQ(Cli({}), kExitConfigError);
  EXPECT_EQ(Cli({"--scenario", "nope"}), kExitConfigError);
  EXPECT_EQ(Cli({"--config", "/nonexistent.yaml"}), kExitConfigError);
  EXPECT_EQ(Cli({"--scenario", "hover-ideal", "--rate", "0", "--print-config"}),
            kExitConfigError);
  EXPECT_EQ(Cli({"--scenario", "hover-ideal", "--bogus"}), kExitConfigError);
}

TEST(CliTest, UnwritableOutputIsRuntimeError) {
  const fs::path dir = TempDir("blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(Cli({"--scenario", "hover-ideal", "--duration", "0.1", "--out",
                 (dir / "file" / "sub").string()}),
            kExitRuntimeError);
}

TEST(CliTest, PrintsMeansInReportingOrder) {
  const fs::path dir = TempDir("means");
  std::string out;
  ASSERT_EQ(Cli({"--scenario", "helical-profile-B", "--delays", "degenerate",
                 "--duration", "2", "--out", dir.string()},
                &out),
            kExitOk);
  const auto ttre = out.find("robot->edge");
  const auto exec = out.find("execution");
  const auto tter = out.find("edge->robot");
  const auto rtt = out.find("round trip");
  ASSERT_NE(rtt, std::string::npos);
  EXPECT_LT(ttre, exec);
  EXPECT_LT(exec, tter);
  EXPECT_LT(tter, rtt);
  EXPECT_NE(out.find("39.500 ms", rtt), std::string::npos) << out;
  for (const char* f : {"manifest.yaml", "trace.csv", "summary.txt",
                        "trajectory3d.dat", "delays.dat", "error.dat"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
}

TEST(CliTest, OneSecondTraceHasHundredRows) {
  const fs::path dir = TempDir("rows");
  ASSERT_EQ(Cli({"--scenario", "circular-profile-A", "--duration", "1", "--out",
                 dir.string()}),
            kExitOk);
  std::ifstream in(dir / "trace.csv");
  const auto rows = ReadTraceCsv(in);
  EXPECT_NEAR(static_cast<double>(rows.size()), 100.0, 1.0);
}

TEST(CliTest, ManifestRerunReproducesTrace) {
  const fs::path first = TempDir("first");
  const fs::path second = TempDir("second");
  ASSERT_EQ(Cli({"--scenario", "helical-profile-A", "--seed", "5", "--duration",
                 "1.5", "--horizon", "40", "--out", first.string()}),
            kExitOk);
  ASSERT_EQ(Cli({"--config", (first / "manifest.yaml").string(), "--out",
                 second.string()}),
            kExitOk);
  const std::string a = Slurp(first / "trace.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, Slurp(second / "trace.csv"));
}

}  // namespace
}  // namespace edgempc
