#include "rigidity/errors.hpp"
#include "rigidity/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace rigidity;

namespace {

std::vector<std::pair<double, double>> power_law(double c, double alpha, int n = 9) {
  std::vector<std::pair<double, double>> out;
  for (double h : geometric(1e-3, 1e-1, n)) out.emplace_back(h, c * std::pow(h, alpha));
  return out;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream s;
  write_csv(s, r.rows);
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rigidity-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Geometric, EndpointsAndSpacing) {
  const auto v = geometric(1e-3, 1e-1, 9);
  ASSERT_EQ(v.size(), 9u);
  EXPECT_DOUBLE_EQ(v.front(), 1e-3);
  EXPECT_DOUBLE_EQ(v.back(), 1e-1);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_NEAR(v[i] / v[i - 1], std::pow(10.0, 0.25), 1e-12);
}

TEST(FitExponent, ExactPowerLaws) {
  const ScalingFit a = fit_exponent(power_law(1.0, 2.0));
  EXPECT_NEAR(a.alpha_hat, 2.0, 1e-12);
  EXPECT_NEAR(a.r2, 1.0, 1e-12);
  const ScalingFit b = fit_exponent(power_law(5.0, -4.0 / 3.0));
  EXPECT_NEAR(b.alpha_hat, -4.0 / 3.0, 1e-12);
  EXPECT_NEAR(b.intercept, std::log(5.0), 1e-12);
  EXPECT_LE(b.max_residual, 1e-12);
  const ScalingFit c = fit_exponent(power_law(3.0, 0.0));
  EXPECT_NEAR(c.alpha_hat, 0.0, 1e-12);
  EXPECT_EQ(c.r2, 1.0);
}

TEST(FitExponent, NoisyDataCalibration) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    auto pairs = power_law(2.0, -0.5);
    for (auto& [h, v] : pairs) v *= 1.0 + noise(rng);
    EXPECT_NEAR(fit_exponent(pairs).alpha_hat, -0.5, 0.05);
  }
}

TEST(FitExponent, Errors) {
  EXPECT_THROW(fit_exponent(power_law(1.0, 1.0, 3)), FitError);
  auto pairs = power_law(1.0, 1.0);
  pairs[4].second = 0.0;
  try {
    fit_exponent(pairs);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("value = 0"), std::string::npos) << e.what();
  }
}

TEST(RunConfigTest, JsonRoundTrip) {
  RunConfig c;
  c.surface = "cylinder";
  c.p = 3.0;
  c.field = FieldChoice::random;
  c.rotation = RotationRule::identity;
  const RunConfig back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(RunConfig::from_json(nlohmann::json::object()).to_json(), RunConfig{}.to_json());
}

TEST(RunConfigTest, RejectsUnknownAndIllTyped) {
  try {
    RunConfig::from_json({{"colour", "red"}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "colour");
  }
  try {
    RunConfig::from_json({{"p", "two"}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "p");
  }
  EXPECT_THROW(RunConfig::from_json({{"field", "ansatz:3"}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"field", "random:x"}}), ConfigError);
}

TEST(RunConfigTest, SeededFieldName) {
  const RunConfig c = RunConfig::from_json({{"field", "random:17"}, {"seeds", 20}, {"seed", 3}});
  EXPECT_EQ(c.field, FieldChoice::random);
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.seeds, 1);
}

TEST(RunConfigTest, Validation) {
  const auto key_of = [](RunConfig c) -> std::string {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return "";
  };
  RunConfig c;
  EXPECT_EQ(key_of(c), "");
  c.p = 1.0;
  EXPECT_EQ(key_of(c), "p");
  c = {};
  c.num_h = 3;
  EXPECT_EQ(key_of(c), "num-h");
  c = {};
  c.h_max = 0.6;  // unit sphere h0 = 0.5
  EXPECT_EQ(key_of(c), "h-max");
  c = {};
  c.h_min = 0.2;
  EXPECT_EQ(key_of(c), "h-min");
  c = {};
  c.surface = "torus";
  EXPECT_EQ(key_of(c), "surface");
  c = {};
  c.gamma = 2.0;
  EXPECT_EQ(key_of(c), "gamma");
}

TEST(RunConfigTest, ThetaResolutionFollowsOscillation) {
  const RunConfig c;
  const CoordRect r = make_sphere()->domain();
  EXPECT_GE(c.resolution_for(1e-3, r).n_theta, static_cast<int>(16.0 / std::sqrt(1e-3)));
  EXPECT_GE(c.resolution_for(1e-1, r).n_theta, 64);
  RunConfig fine;
  fine.refine = 2;
  EXPECT_EQ(fine.resolution_for(1e-2, r).n_z, 2 * c.resolution_for(1e-2, r).n_z);
  EXPECT_DOUBLE_EQ(c.epsilon_for(0.01), 0.01);
  fine.epsilon_rule = EpsilonRule::h_squared;
  EXPECT_DOUBLE_EQ(fine.epsilon_for(0.01), 1e-4);
}

TEST(Sweep, AnsatzSharpnessOnSphere) {
  const SweepResult r = run_sweep(RunConfig{});
  ASSERT_FALSE(r.failed()) << r.failure;
  ASSERT_EQ(r.rows.size(), 9u);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_EQ(r.verdict.kind, VerdictKind::sharpness);
  EXPECT_TRUE(r.verdict.pass) << r.verdict.message;
  EXPECT_LE(std::abs(r.fit->alpha_hat), 0.2);
  for (const SweepRow& row : r.rows) {
    EXPECT_EQ(row.status, ReportStatus::ok);
    EXPECT_TRUE(std::isfinite(row.ratio));
  }
}

TEST(Sweep, KornAnsatzBounded) {
  const SweepResult r = korn_sweep(RunConfig{});
  ASSERT_FALSE(r.failed()) << r.failure;
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_TRUE(r.verdict.pass) << r.verdict.message;
  EXPECT_LE(std::abs(r.fit->alpha_hat), 0.2);
}

TEST(Sweep, RigidFieldSkipsFit) {
  RunConfig c;
  c.field = FieldChoice::rigid;
  c.seeds = 2;
  c.num_h = 4;
  const SweepResult r = run_sweep(c);
  ASSERT_FALSE(r.failed()) << r.failure;
  EXPECT_EQ(r.verdict.kind, VerdictKind::skipped);
  EXPECT_TRUE(r.verdict.pass);
  EXPECT_FALSE(r.fit.has_value());
  for (const SweepRow& row : r.rows) EXPECT_EQ(row.status, ReportStatus::degenerate_exact);
}

TEST(Sweep, SkewKornReportedNotFitted) {
  RunConfig c;
  c.field = FieldChoice::skew;
  c.num_h = 4;
  const SweepResult r = korn_sweep(c);
  ASSERT_FALSE(r.failed()) << r.failure;
  EXPECT_EQ(r.verdict.kind, VerdictKind::reported);
  EXPECT_FALSE(r.fit.has_value());
}

TEST(Sweep, RandomBatteryValidity) {
  RunConfig c;
  c.field = FieldChoice::random;
  c.seeds = 3;
  c.num_h = 4;
  const SweepResult r = run_sweep(c);
  ASSERT_FALSE(r.failed()) << r.failure;
  EXPECT_EQ(r.verdict.kind, VerdictKind::validity);
  EXPECT_TRUE(r.verdict.pass) << r.verdict.message;
  ASSERT_EQ(r.seed_ratios.size(), 4u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(r.seed_ratios[i].size(), 3u);
    EXPECT_DOUBLE_EQ(r.rows[i].ratio, *std::max_element(r.seed_ratios[i].begin(), r.seed_ratios[i].end()));
  }
}

TEST(Sweep, Deterministic) {
  RunConfig c;
  c.num_h = 4;
  c.h_min = 1e-2;
  EXPECT_EQ(csv_of(run_sweep(c)), csv_of(run_sweep(c)));
  c.field = FieldChoice::random;
  c.seeds = 2;
  EXPECT_EQ(csv_of(run_sweep(c)), csv_of(run_sweep(c)));
}

TEST(Sweep, ResolutionRobust) {
  RunConfig c;
  RunConfig fine = c;
  fine.refine = 2;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const double a = evaluate_at(c, h).ratio;
    const double b = evaluate_at(fine, h).ratio;
    EXPECT_LT(std::abs(a - b) / b, 0.01) << h;
  }
}

// In the linearisation regime (eps <= h / 10) shrinking eps tenfold moves
// the ratio by well under 5%.
TEST(Sweep, EpsilonLinearisation) {
  RunConfig c;
  c.epsilon_rule = EpsilonRule::fixed;
  for (double h : {1e-1, 1e-2}) {
    c.epsilon = h / 10;
    const double a = evaluate_at(c, h).ratio;
    c.epsilon = h / 100;
    const double b = evaluate_at(c, h).ratio;
    EXPECT_LT(std::abs(a - b) / b, 0.05) << h;
  }
}

TEST(Sweep, FailureIsRecorded) {
  RunConfig c;
  c.field = FieldChoice::file;
  c.field_file = "/nonexistent/field.csv";
  c.num_h = 4;
  const SweepResult r = run_sweep(c);
  EXPECT_TRUE(r.failed());
  EXPECT_DOUBLE_EQ(*r.failed_h, c.h_min);
  EXPECT_FALSE(r.verdict.pass);
  EXPECT_TRUE(r.rows.empty());
}

TEST(Sweep, OutputsWritten) {
  RunConfig c;
  c.num_h = 4;
  c.h_min = 1e-2;
  const SweepResult r = run_sweep(c);
  const auto dir = scratch("sweep");
  write_sweep_outputs(r, dir);
  for (const char* f : {"config.json", "sweep.csv", "fit.json", "summary.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream csv(dir / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, kSweepCsvHeader);
  std::ifstream fit_file(dir / "fit.json");
  const auto fit = nlohmann::json::parse(fit_file);
  for (const char* k : {"alpha_hat", "intercept", "r2", "max_residual", "config_echo"}) {
    EXPECT_TRUE(fit.contains(k)) << k;
  }
  EXPECT_EQ(fit.at("config_echo").at("surface"), "sphere");
  std::filesystem::remove_all(dir);
}

TEST(Trace, RunsOnBumpProfile) {
  RunConfig c;
  c.profile = "bump";
  c.h = 1e-2;
  c.trials = 50;
  const TraceResult t = run_trace(c);
  EXPECT_TRUE(t.all_checks_hold);
  ASSERT_TRUE(t.passage.has_value());
  EXPECT_FALSE(t.passage->trivial);
  EXPECT_GT(t.audit.min_constant, 0.0);
  const auto dir = scratch("trace");
  write_trace_outputs(t, dir);
  for (const char* f : {"config.json", "trace.csv", "trace.json", "summary.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::filesystem::remove_all(dir);
}

TEST(GradientCheckTest, SecondOrderOnAllSurfaces) {
  for (const char* name : {"plate", "sphere", "cylinder", "pseudospherical"}) {
    SurfaceSpec spec;
    spec.name = name;
    const SurfacePtr s = make_surface(spec);
    for (const char* field : {"polynomial", "random", "ansatz"}) {
      const GradientCheck g = check_gradient(s, field, 0.1, 20, 1e-4, 1);
      EXPECT_LE(g.max_error, 1e-5) << name << " " << field;
      EXPECT_EQ(g.points, 20u);
    }
  }
  SurfaceSpec spec;
  const GradientCheck g = check_gradient(make_surface(spec), "random", 0.1, 50, 1e-3, 2);
  EXPECT_GT(g.order, 1.8);
  EXPECT_LT(g.order, 2.2);
  EXPECT_THROW(check_gradient(make_surface(spec), "cubic", 0.1, 5, 1e-4, 1), ConfigError);
}
