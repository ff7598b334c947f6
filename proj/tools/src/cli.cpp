#include "rigidity/cli.hpp"

#include "rigidity/errors.hpp"
#include "rigidity/experiments.hpp"
#include "rigidity/matrixops.hpp"
#include "rigidity/parallel.hpp"
#include "rigidity/so3_oracle.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace rigidity::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kSweepFiles = {"config.json", "sweep.csv", "fit.json", "summary.txt"};
const std::vector<std::string> kTraceFiles = {"config.json", "trace.csv", "trace.json", "summary.txt"};

// Every RunConfig key becomes a flag of the same name; only flags given on
// the command line override the defaults or the --config file.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::string config_file;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    const nlohmann::json defaults = RunConfig{}.to_json();
    for (const auto& [key, v] : defaults.items()) {
      sub->add_option("--" + key, values[key], "default: " + v.dump());
    }
    sub->add_option("--config", config_file, "JSON file with any of the keys above");
  }

  RunConfig resolve() const {
    nlohmann::json j = RunConfig{}.to_json();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("config", "cannot open '" + config_file + "'");
      nlohmann::json file;
      try {
        file = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
      }
      if (!file.is_object()) throw ConfigError("config", "expected a JSON object");
      // Reject unknown or ill-typed keys with the key name before merging.
      RunConfig::from_json(file);
      for (const auto& [key, v] : file.items()) j[key] = v;
    }
    for (const auto& [key, text] : values) {
      if (app->get_option("--" + key)->count() == 0) continue;
      const nlohmann::json& def = j[key];
      try {
        std::size_t used = 0;
        if (def.is_number_unsigned()) {
          if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
          j[key] = std::stoull(text, &used);
        } else if (def.is_number_integer()) {
          j[key] = std::stoll(text, &used);
        } else if (def.is_number()) {
          j[key] = std::stod(text, &used);
        } else {
          j[key] = text;
          used = text.size();
        }
        if (used != text.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ConfigError(key, "cannot parse '" + text + "'");
      }
    }
    return RunConfig::from_json(j);
  }
};

fs::path resolve_output(const std::string& flag, const std::string& sub) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("RIGIDITY_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return fs::path(env) / sub;
  }
  return fs::path("rigidity-output") / sub;
}

void prepare_output(const fs::path& dir, bool force, const std::vector<std::string>& files) {
  if (!fs::exists(dir)) return;
  if (!fs::is_directory(dir)) throw UsageError(dir.string() + " exists and is not a directory");
  for (const auto& f : files) {
    if (!fs::exists(dir / f)) continue;
    if (!force) {
      throw UsageError(dir.string() + " already holds results; pass --force to overwrite them");
    }
    fs::remove(dir / f);
  }
}

struct OutputFlags {
  std::string output;
  bool force = false;
  void attach(CLI::App* sub) {
    sub->add_option("--output", output,
                    "output directory (default: $RIGIDITY_OUTPUT_DIR/<command> or "
                    "rigidity-output/<command>)");
    sub->add_flag("--force", force, "overwrite existing results");
  }
};

int run_sweep_command(const RunConfig& config, bool korn, const OutputFlags& o,
                      std::ostream& out) {
  config.validate();
  const fs::path dir = resolve_output(o.output, korn ? "korn-sweep" : "sweep");
  prepare_output(dir, o.force, kSweepFiles);
  const SweepResult r = korn ? korn_sweep(config) : run_sweep(config);
  write_sweep_outputs(r, dir);
  out << summary_text(r);
  out << "outputs written to " << dir.string() << "\n";
  return r.failed() || !r.verdict.pass ? kExitFailedVerdict : kExitPass;
}

int run_trace_command(const RunConfig& config, const OutputFlags& o, std::ostream& out) {
  const fs::path dir = resolve_output(o.output, "trace");
  prepare_output(dir, o.force, kTraceFiles);
  const TraceResult r = run_trace(config);
  write_trace_outputs(r, dir);
  std::ifstream summary(dir / "summary.txt");
  out << summary.rdbuf();
  out << "outputs written to " << dir.string() << "\n";
  return r.all_checks_hold ? kExitPass : kExitFailedVerdict;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks of the geometric rigidity interpolation inequality on thin domains",
               "rigidity"};
  app.require_subcommand(1);
  app.fallthrough();
  // "--h" is the thickness flag, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");
  unsigned threads = 0;
  app.add_option("--threads", threads, "cap on worker threads (0 = all cores)");

  ConfigFlags sweep_cfg, korn_cfg, trace_cfg, show_cfg;
  OutputFlags sweep_out, korn_out, trace_out;

  CLI::App* sweep = app.add_subcommand("sweep", "interpolation-ratio sweep over h with a log-log fit");
  sweep_cfg.attach(sweep);
  sweep_out.attach(sweep);
  CLI::App* korn = app.add_subcommand("korn-sweep", "linearised (Korn) ratio sweep over h");
  korn_cfg.attach(korn);
  korn_out.attach(korn);
  CLI::App* trace = app.add_subcommand("trace", "patch-by-patch trace of the localization argument at one h");
  trace_cfg.attach(trace);
  trace_out.attach(trace);
  CLI::App* show = app.add_subcommand("show-config", "print the effective configuration as JSON");
  show_cfg.attach(show);

  CLI::App* grad = app.add_subcommand("check-gradient", "frame gradient against the finite-difference oracle");
  std::string grad_surfaces = "sphere,cylinder,plate,catenoid";
  std::string grad_fields = "polynomial,random,ansatz";
  std::size_t grad_points = 100;
  double grad_step = 1e-4;
  double grad_h = 0.1;
  double grad_tol = 1e-5;
  unsigned long long grad_seed = 1;
  grad->add_option("--surfaces", grad_surfaces, "comma-separated surface names");
  grad->add_option("--fields", grad_fields, "comma-separated: polynomial, random, ansatz");
  grad->add_option("--points", grad_points, "random interior points per surface and field");
  grad->add_option("--step", grad_step, "finite-difference step");
  grad->add_option("--h", grad_h, "shell thickness");
  grad->add_option("--tol", grad_tol, "maximum Frobenius error");
  grad->add_option("--seed", grad_seed, "seed for points and random fields");

  CLI::App* dso3 = app.add_subcommand("dist-so3", "distance to SO(3)");
  bool selftest = false;
  std::vector<double> matrix;
  std::size_t st_count = 200;
  std::size_t st_rotations = 1u << 17;
  double st_tol = 1e-2;
  unsigned long long st_seed = 2024;
  dso3->add_flag("--selftest", selftest, "compare with the brute-force oracle");
  dso3->add_option("--matrix", matrix, "nine entries, row by row")->expected(9)->delimiter(',');
  dso3->add_option("--count", st_count, "random matrices in the self-test");
  dso3->add_option("--rotations", st_rotations, "low-discrepancy rotations in the oracle");
  dso3->add_option("--tol", st_tol, "self-test tolerance");
  dso3->add_option("--seed", st_seed, "self-test seed");

  CLI::App* dbl = app.add_subcommand("doubling", "ratio of surface areas of balls of radii r and 2r");
  std::string d_surface = "sphere";
  double d_surface_radius = 1.0;
  double d_r = 0.05;
  std::optional<double> d_theta;
  std::optional<double> d_z;
  long d_budget = 250000;
  std::string d_method = "quadrature";
  unsigned long long d_seed = 1;
  dbl->add_option("--surface", d_surface);
  dbl->add_option("--radius", d_surface_radius, "sphere/cylinder radius or catenoid neck");
  dbl->add_option("--r", d_r, "ball radius");
  dbl->add_option("--theta", d_theta, "centre (default: patch centre)");
  dbl->add_option("--z", d_z, "centre (default: patch centre)");
  dbl->add_option("--budget", d_budget, "indicator evaluations per ball");
  dbl->add_option("--method", d_method, "quadrature or monte-carlo");
  dbl->add_option("--seed", d_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    set_max_threads(threads);
    if (sweep->parsed()) return run_sweep_command(sweep_cfg.resolve(), false, sweep_out, out);
    if (korn->parsed()) return run_sweep_command(korn_cfg.resolve(), true, korn_out, out);
    if (trace->parsed()) return run_trace_command(trace_cfg.resolve(), trace_out, out);
    if (show->parsed()) {
      out << show_cfg.resolve().to_json().dump(2) << "\n";
      return kExitPass;
    }
    if (grad->parsed()) {
      bool pass = true;
      out << std::left << std::setw(10) << "surface" << std::setw(12) << "field" << std::setw(14)
          << "max error" << "order\n";
      for (const auto& s : split(grad_surfaces)) {
        SurfaceSpec spec;
        spec.name = s;
        const SurfacePtr surface = make_surface(spec);
        for (const auto& f : split(grad_fields)) {
          const GradientCheck c = check_gradient(surface, f, grad_h, grad_points, grad_step, grad_seed);
          const bool ok = c.max_error <= grad_tol;
          pass = pass && ok;
          out << std::setw(10) << s << std::setw(12) << f << std::setw(14) << c.max_error
              << c.order << (ok ? "" : "  FAIL") << "\n";
        }
      }
      out << (pass ? "PASS" : "FAIL") << "\n";
      return pass ? kExitPass : kExitFailedVerdict;
    }
    if (dso3->parsed()) {
      if (!matrix.empty()) {
        Mat3 f;
        for (int i = 0; i < 9; ++i) f(i / 3, i % 3) = matrix[i];
        out << std::setprecision(17) << dist_so3(f) << "\n";
        if (!selftest) return kExitPass;
      }
      if (!selftest) throw UsageError("dist-so3: pass --selftest or --matrix");
      const oracle::SelfTestReport r = oracle::dist_so3_selftest(st_count, st_rotations, st_tol, st_seed);
      std::size_t failed = 0;
      for (const auto& c : r.cases) {
        if (!c.passed) {
          ++failed;
          out << "  mismatch " << c.label << ": formula " << c.formula << ", brute force "
              << c.brute_force << "\n";
        }
      }
      out << r.cases.size() << " cases (" << r.negative_determinant_cases
          << " with det < 0), " << r.rotation_count << " rotations, max |error| = "
          << r.max_abs_error << ", tolerance " << r.tolerance << "\n";
      out << (r.passed ? "PASS" : "FAIL") << "\n";
      return r.passed ? kExitPass : kExitFailedVerdict;
    }
    if (dbl->parsed()) {
      SurfaceSpec spec;
      spec.name = d_surface;
      spec.radius = d_surface_radius;
      const SurfacePtr surface = make_surface(spec);
      DoublingMethod method;
      if (d_method == "quadrature") method = DoublingMethod::quadrature;
      else if (d_method == "monte-carlo") method = DoublingMethod::monte_carlo;
      else throw ConfigError("method", "expected quadrature or monte-carlo");
      const double th = d_theta.value_or(surface->domain().theta_center());
      const double z = d_z.value_or(surface->domain().z_center());
      const DoublingEstimate e = doubling_ratio(*surface, th, z, d_r, d_budget, method, d_seed);
      nlohmann::json j = {{"surface", d_surface}, {"theta", th},   {"z", z},
                          {"r", d_r},             {"ratio", e.ratio}, {"std_error", e.std_error},
                          {"inner_area", e.inner_area}, {"outer_area", e.outer_area}};
      if (!e.warning.empty()) j["warning"] = e.warning;
      out << j.dump(2) << "\n";
      return kExitPass;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedExponentError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailedVerdict;
  }
  return kExitUsage;
}

}  // namespace rigidity::cli
