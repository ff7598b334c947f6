#include "rigidity/cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using rigidity::cli::parse_and_dispatch;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"rigidity"};
  owned.insert(owned.end(), args);
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rigidity-cli-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, PEqualOneIsUsageError) {
  const Invocation r = run({"sweep", "--p", "1", "--output", scratch("p1").string()});
  EXPECT_EQ(r.code, rigidity::cli::kExitUsage);
  EXPECT_NE(r.err.find("1 < p < infinity"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagRejected) {
  EXPECT_EQ(run({"sweep", "--colour", "red"}).code, rigidity::cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, rigidity::cli::kExitUsage);
  EXPECT_EQ(run({}).code, rigidity::cli::kExitUsage);
}

TEST(Cli, MalformedConfigNamesKey) {
  const fs::path dir = scratch("badcfg");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"surface": "sphere", "colour": 3})";
  const Invocation r = run({"show-config", "--config", (dir / "cfg.json").string()});
  EXPECT_EQ(r.code, rigidity::cli::kExitUsage);
  EXPECT_NE(r.err.find("colour"), std::string::npos) << r.err;
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run({"show-config", "--config", (dir / "broken.json").string()}).code,
            rigidity::cli::kExitUsage);
  fs::remove_all(dir);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = scratch("override");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"surface": "cylinder", "p": 3})";
  const Invocation r = run({"show-config", "--config", (dir / "cfg.json").string(), "--p", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("surface"), "cylinder");
  EXPECT_EQ(j.at("p"), 4.0);
  fs::remove_all(dir);
}

TEST(Cli, ShowConfigPrintsDefaults) {
  const Invocation r = run({"show-config"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("surface"), "sphere");
  EXPECT_EQ(j.at("num-h"), 9);
}

TEST(Cli, DistSelfTest) {
  const Invocation r = run({"dist-so3", "--selftest", "--count", "20", "--rotations", "32768"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const Invocation m = run({"dist-so3", "--matrix", "2,0,0,0,1,0,0,0,1"});
  EXPECT_EQ(m.code, 0) << m.err;
  EXPECT_NE(m.out.find("1"), std::string::npos);
  EXPECT_EQ(run({"dist-so3", "--matrix", "1,2,3"}).code, rigidity::cli::kExitUsage);
}

TEST(Cli, Doubling) {
  const Invocation r = run({"doubling", "--surface", "plate", "--r", "0.01"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0.25"), std::string::npos) << r.out;
}

TEST(Cli, CheckGradient) {
  const Invocation r = run({"check-gradient", "--surfaces", "sphere", "--fields", "polynomial", "--points", "10"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(run({"check-gradient", "--fields", "cubic"}).code, rigidity::cli::kExitUsage);
}

TEST(Cli, SweepWritesOutputsAndHonoursForce) {
  const fs::path dir = scratch("sweep");
  const std::string out = dir.string();
  const Invocation first = run({"sweep", "--h-min", "1e-2", "--num-h", "4", "--output", out});
  ASSERT_EQ(first.code, 0) << first.out << first.err;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"config.json", "fit.json", "summary.txt", "sweep.csv"}));
  const std::string csv = slurp(dir / "sweep.csv");
  const std::string fit = slurp(dir / "fit.json");

  EXPECT_EQ(run({"sweep", "--h-min", "1e-2", "--num-h", "4", "--output", out}).code,
            rigidity::cli::kExitUsage);
  const Invocation again = run({"sweep", "--h-min", "1e-2", "--num-h", "4", "--output", out, "--force"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(dir / "sweep.csv"), csv);
  EXPECT_EQ(slurp(dir / "fit.json"), fit);
  fs::remove_all(dir);
}

TEST(Cli, FailedVerdictExitsOne) {
  const fs::path dir = scratch("fail");
  // An absurdly tight slope tolerance cannot be met.
  const Invocation r = run({"korn-sweep", "--h-min", "1e-2", "--num-h", "4", "--slope-tol", "1e-9",
                     "--output", dir.string()});
  EXPECT_EQ(r.code, rigidity::cli::kExitFailedVerdict) << r.out << r.err;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch("env");
  ::setenv("RIGIDITY_OUTPUT_DIR", dir.string().c_str(), 1);
  const Invocation r = run({"trace", "--h", "0.05", "--trials", "10"});
  ::unsetenv("RIGIDITY_OUTPUT_DIR");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir / "trace" / "trace.json"));
  EXPECT_TRUE(fs::exists(dir / "trace" / "config.json"));
  fs::remove_all(dir);
}
