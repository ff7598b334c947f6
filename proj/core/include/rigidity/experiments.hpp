#pragma once

// h-sweeps of the interpolation and Korn ratios, log-log exponent fits and
// the verdicts built on them, plus persistence of sweep outputs.

#include "rigidity/inequality.hpp"
#include "rigidity/localization.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rigidity {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class FieldChoice { ansatz, random, rigid, skew, identity, file };
enum class EpsilonRule { h, h_squared, fixed };
enum class RotationRule { identity, best_fit };
enum class OffsetRule { mean, zero };

/// Every knob of a run. Keys of the JSON form match the command-line flags.
struct RunConfig {
  std::string surface = "sphere";
  double radius = 1.0;
  std::string profile = "shell";
  double p = 2.0;

  double h_min = 1e-3;
  double h_max = 1e-1;
  int num_h = 9;
  double h = 1e-2;  // single-h commands (trace)

  FieldChoice field = FieldChoice::ansatz;
  int seeds = 20;
  unsigned long long seed = 1;
  double amplitude = 1.0;
  int modes = 3;
  std::string field_file;
  // Field names also accept random:<seed> and rigid:<seed> (a single seed).
  double ansatz_support = 0.4;  // fraction of the theta half-extent covered at h_max

  EpsilonRule epsilon_rule = EpsilonRule::h;
  double epsilon = 1e-2;
  std::optional<RotationRule> rotation;  // default: identity for the ansatz, best fit otherwise
  OffsetRule offset = OffsetRule::mean;

  int n_t = 8;
  int n_z = 64;
  int n_theta_min = 64;
  double theta_density = 16.0;  // n_theta >= density * theta_extent / sqrt(h)
  int panel_order = 8;
  int refine = 1;               // multiplies every grid dimension

  double gamma = 0.5;
  double passage_size = 4.0;    // thin-domain cells of size passage_size * h
  int trials = 1000;

  double slope_tol = 0.2;
  double r2_floor = 0.9;

  nlohmann::json to_json() const;
  /// Unknown keys and ill-typed values throw ConfigError naming the key.
  static RunConfig from_json(const nlohmann::json& j);

  /// Checks the sweep invariants (count >= 4, h_min < h_max < h0, 1 < p < inf,
  /// ...); throws ConfigError naming the offending key.
  void validate() const;

  SurfacePtr make_surface() const;
  ThicknessProfile make_profile(double h, const SurfacePtr& surface) const;
  std::vector<double> h_values() const;
  GridResolution resolution_for(double h, const CoordRect& rect) const;
  double epsilon_for(double h) const;
  RotationRule rotation_rule() const;
  AnsatzProfile ansatz_profile(const CoordRect& rect) const;
};

const char* to_string(FieldChoice c);
const char* to_string(EpsilonRule r);

/// geometric(a, b, n): n values from a to b, equally spaced in log.
std::vector<double> geometric(double a, double b, int n);

struct ScalingFit {
  std::vector<std::pair<double, double>> pairs;
  double alpha_hat = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double max_residual = 0.0;
};

/// OLS of log(value) against log(h). Needs >= 4 pairs with positive values;
/// FitError names the first offending pair. R^2 is 1 when the values are
/// constant.
ScalingFit fit_exponent(const std::vector<std::pair<double, double>>& pairs);

/// One CSV row of a sweep.
struct SweepRow {
  double h = 0.0;
  double p = 2.0;
  double epsilon = 0.0;
  double lhs = 0.0;
  double rhs_product = 0.0;
  double rhs_field_sq = 0.0;
  double rhs_dist_sq = 0.0;
  double ratio = 0.0;
  GridResolution grid;
  ReportStatus status = ReportStatus::ok;
  int seed = -1;  // field seed behind the row (random battery: the maximising seed)
};

enum class VerdictKind { sharpness, validity, skipped, reported };

struct Verdict {
  VerdictKind kind = VerdictKind::skipped;
  bool pass = true;
  std::string message;
};

const char* to_string(VerdictKind k);

struct SweepResult {
  RunConfig config;
  std::string quantity;  // "interpolation" or "korn"
  std::vector<SweepRow> rows;
  std::vector<std::vector<double>> seed_ratios;  // per h, per seed (random battery)
  std::optional<ScalingFit> fit;
  Verdict verdict;
  std::optional<double> failed_h;
  std::string failure;

  bool failed() const { return failed_h.has_value(); }
};

/// Interpolation-ratio sweep. A per-h exception stops the sweep; the rows
/// computed so far are kept and failed_h / failure describe the error.
SweepResult run_sweep(const RunConfig& config);

/// Same for the linearised (Korn) ratio of displacement fields.
SweepResult korn_sweep(const RunConfig& config);

/// Interpolation report for the given configuration at one h.
SweepRow evaluate_at(const RunConfig& config, double h, int seed = -1);

inline constexpr const char* kSweepCsvHeader =
    "h,p,epsilon,lhs,rhs_product,rhs_field_sq,rhs_dist_sq,ratio,grid_nt,grid_ntheta,grid_nz";

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
nlohmann::json fit_json(const SweepResult& result);
std::string summary_text(const SweepResult& result);

/// Writes config.json, sweep.csv, fit.json and summary.txt into `dir`.
void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

/// Localization run at config.h: shell patch trace, rotation audit and the
/// thin-domain passage on the configured profile.
struct TraceResult {
  RunConfig config;
  PatchDecomposition decomposition;
  TraceSummary trace;
  RotationAudit audit;
  std::optional<PassageReport> passage;
  bool all_checks_hold = true;
  nlohmann::json to_json() const;
};

TraceResult run_trace(const RunConfig& config);
void write_trace_outputs(const TraceResult& result, const std::filesystem::path& dir);

/// frame_gradient against the finite-difference Euclidean oracle at random
/// interior points of a shell of thickness h, at steps `step` and step/2.
/// `order` is log2 of the ratio of the summed errors.
struct GradientCheck {
  std::string surface;
  std::string field;
  std::size_t points = 0;
  double step = 0.0;
  double max_error = 0.0;
  double max_error_half = 0.0;
  double order = 0.0;
  nlohmann::json to_json() const;
};

/// field is one of polynomial, random, ansatz.
GradientCheck check_gradient(const SurfacePtr& surface, const std::string& field, double h,
                             std::size_t points, double step, unsigned long long seed);

/// Field used by sweeps and traces for the given seed (displacement form;
/// the ansatz ignores the seed).
FrameField make_displacement(const RunConfig& config, const SurfacePtr& surface, double h,
                             int seed);

}  // namespace rigidity
