#include "rigidity/experiments.hpp"

#include "rigidity/errors.hpp"
#include "rigidity/matrixops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace rigidity {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<FieldChoice> kFieldNames[] = {{FieldChoice::ansatz, "ansatz"},
                                                 {FieldChoice::random, "random"},
                                                 {FieldChoice::rigid, "rigid"},
                                                 {FieldChoice::skew, "skew"},
                                                 {FieldChoice::identity, "identity"},
                                                 {FieldChoice::file, "file"}};
constexpr EnumName<EpsilonRule> kEpsilonNames[] = {
    {EpsilonRule::h, "h"}, {EpsilonRule::h_squared, "h2"}, {EpsilonRule::fixed, "fixed"}};
constexpr EnumName<RotationRule> kRotationNames[] = {{RotationRule::identity, "identity"},
                                                     {RotationRule::best_fit, "best-fit"}};
constexpr EnumName<OffsetRule> kOffsetNames[] = {{OffsetRule::mean, "mean"},
                                                 {OffsetRule::zero, "zero"}};

template <class E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

template <class E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const std::string& key, const std::string& text) {
  std::string allowed;
  for (const auto& e : table) {
    if (text == e.name) return e.value;
    allowed += allowed.empty() ? e.name : std::string(", ") + e.name;
  }
  throw ConfigError(key, "unknown value '" + text + "' (expected one of " + allowed + ")");
}

template <class T>
T get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "ill-typed value " + j.dump());
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string short_fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

FrameField rigid_displacement(const SurfacePtr& surface, int seed) {
  const FrameField y = rigid_field_from_seed(surface, static_cast<unsigned long long>(seed));
  const FrameField x = identity_field(surface);
  return FrameField(
      FieldKind::displacement,
      [y, x](const ChartPoint& q) {
        FieldJet a = y(q);
        const FieldJet b = x(q);
        a.value -= b.value;
        a.partials -= b.partials;
        return a;
      },
      "rigid-displacement:" + std::to_string(seed));
}

FrameField make_deformation(const RunConfig& c, const SurfacePtr& surface, double h, int seed) {
  if (c.field == FieldChoice::rigid) {
    return rigid_field_from_seed(surface, static_cast<unsigned long long>(seed));
  }
  if (c.field == FieldChoice::identity) return identity_field(surface);
  return identity_plus(surface, c.epsilon_for(h), make_displacement(c, surface, h, seed));
}

std::vector<int> seed_list(const RunConfig& c) {
  if (c.field == FieldChoice::random || c.field == FieldChoice::rigid) {
    std::vector<int> s(c.seeds);
    for (int i = 0; i < c.seeds; ++i) s[i] = static_cast<int>(c.seed) + i;
    return s;
  }
  return {-1};
}

QuadratureGrid grid_for(const RunConfig& c, const SurfacePtr& surface, double h,
                        GridResolution& res) {
  const ThinDomain domain(surface, c.make_profile(h, surface));
  res = c.resolution_for(h, surface->domain());
  return build_grid(domain, res, c.panel_order);
}

Verdict decide(const RunConfig& c, const std::vector<SweepRow>& rows,
               std::optional<ScalingFit>& fit, bool korn) {
  Verdict v;
  const bool all_degenerate = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.status == ReportStatus::degenerate_exact;
  });
  if (all_degenerate) {
    v.kind = VerdictKind::skipped;
    v.pass = true;
    v.message = "all ratios degenerate-exact (rigid motion); fit skipped";
    return v;
  }
  for (const SweepRow& r : rows) {
    if (r.status != ReportStatus::ok) {
      v.kind = VerdictKind::skipped;
      v.pass = false;
      v.message = "h = " + short_fmt(r.h) + " gave status " + to_string(r.status) + "; fit skipped";
      return v;
    }
  }
  if (c.field == FieldChoice::skew || (korn && c.field == FieldChoice::rigid)) {
    v.kind = VerdictKind::reported;
    v.pass = true;
    v.message = "ratios reported, not fitted";
    return v;
  }
  std::vector<std::pair<double, double>> pairs;
  for (const SweepRow& r : rows) pairs.emplace_back(r.h, r.ratio);
  fit = fit_exponent(pairs);
  std::ostringstream msg;
  msg << "alpha_hat = " << short_fmt(fit->alpha_hat) << ", R^2 = " << short_fmt(fit->r2);
  if (fit->r2 < c.r2_floor) msg << " (below the R^2 floor " << c.r2_floor << ")";
  if (c.field == FieldChoice::ansatz) {
    v.kind = VerdictKind::sharpness;
    v.pass = std::abs(fit->alpha_hat) <= c.slope_tol;
    msg << "; sharpness requires |alpha_hat| <= " << c.slope_tol;
  } else {
    v.kind = VerdictKind::validity;
    v.pass = fit->alpha_hat >= -c.slope_tol;
    msg << "; validity requires alpha_hat >= " << -c.slope_tol;
  }
  v.message = msg.str();
  return v;
}

template <class Eval>
SweepResult sweep_impl(const RunConfig& config, const char* quantity, bool korn, Eval eval) {
  config.validate();
  SweepResult res;
  res.config = config;
  res.quantity = quantity;
  const std::vector<int> seeds = seed_list(config);
  for (double h : config.h_values()) {
    try {
      std::vector<SweepRow> per_seed;
      for (int s : seeds) per_seed.push_back(eval(h, s));
      std::vector<double> ratios;
      for (const auto& r : per_seed) ratios.push_back(r.ratio);
      // The row for this h is the seed with the largest ratio.
      std::size_t best = 0;
      for (std::size_t i = 1; i < per_seed.size(); ++i) {
        if (per_seed[i].status == ReportStatus::ok &&
            (per_seed[best].status != ReportStatus::ok || per_seed[i].ratio > per_seed[best].ratio)) {
          best = i;
        }
      }
      res.rows.push_back(per_seed[best]);
      res.seed_ratios.push_back(std::move(ratios));
    } catch (const std::exception& e) {
      res.failed_h = h;
      res.failure = e.what();
      res.verdict = {VerdictKind::skipped, false, "sweep aborted at h = " + short_fmt(h) + ": " + e.what()};
      return res;
    }
  }
  res.verdict = decide(config, res.rows, res.fit, korn);
  return res;
}

}  // namespace

const char* to_string(FieldChoice c) { return name_of(kFieldNames, c); }
const char* to_string(EpsilonRule r) { return name_of(kEpsilonNames, r); }

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::sharpness: return "sharpness";
    case VerdictKind::validity: return "validity";
    case VerdictKind::skipped: return "skipped";
    case VerdictKind::reported: return "reported";
  }
  return "?";
}

nlohmann::json RunConfig::to_json() const {
  return {{"surface", surface},
          {"radius", radius},
          {"profile", profile},
          {"p", p},
          {"h-min", h_min},
          {"h-max", h_max},
          {"num-h", num_h},
          {"h", h},
          {"field", to_string(field)},
          {"seeds", seeds},
          {"seed", seed},
          {"amplitude", amplitude},
          {"modes", modes},
          {"field-file", field_file},
          {"ansatz-support", ansatz_support},
          {"epsilon-rule", to_string(epsilon_rule)},
          {"epsilon", epsilon},
          {"rotation", rotation ? name_of(kRotationNames, *rotation) : "auto"},
          {"offset", name_of(kOffsetNames, offset)},
          {"n-t", n_t},
          {"n-z", n_z},
          {"n-theta-min", n_theta_min},
          {"theta-density", theta_density},
          {"panel-order", panel_order},
          {"refine", refine},
          {"gamma", gamma},
          {"passage-size", passage_size},
          {"trials", trials},
          {"slope-tol", slope_tol},
          {"r2-floor", r2_floor}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<config>", "expected a JSON object");
  RunConfig c;
  // Object keys iterate in sorted order, so "field" is seen before "seed"/"seeds".
  bool seeded_field = false;
  for (const auto& [key, v] : j.items()) {
    if (seeded_field && (key == "seed" || key == "seeds")) continue;
    if (key == "surface") c.surface = get<std::string>(v, key);
    else if (key == "radius") c.radius = get<double>(v, key);
    else if (key == "profile") c.profile = get<std::string>(v, key);
    else if (key == "p") c.p = get<double>(v, key);
    else if (key == "h-min") c.h_min = get<double>(v, key);
    else if (key == "h-max") c.h_max = get<double>(v, key);
    else if (key == "num-h") c.num_h = get<int>(v, key);
    else if (key == "h") c.h = get<double>(v, key);
    else if (key == "field") {
      const auto name = get<std::string>(v, key);
      const auto colon = name.find(':');
      if (colon == std::string::npos) {
        c.field = parse_enum(kFieldNames, key, name);
      } else {
        c.field = parse_enum(kFieldNames, key, name.substr(0, colon));
        if (c.field != FieldChoice::random && c.field != FieldChoice::rigid) {
          throw ConfigError(key, "only random:<seed> and rigid:<seed> take a seed");
        }
        try {
          std::size_t used = 0;
          c.seed = std::stoull(name.substr(colon + 1), &used);
          if (used != name.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ConfigError(key, "bad seed in '" + name + "'");
        }
        c.seeds = 1;
        // A later "seed"/"seeds" key must not undo the explicit choice.
        seeded_field = true;
      }
    }
    else if (key == "seeds") c.seeds = get<int>(v, key);
    else if (key == "seed") c.seed = get<unsigned long long>(v, key);
    else if (key == "amplitude") c.amplitude = get<double>(v, key);
    else if (key == "modes") c.modes = get<int>(v, key);
    else if (key == "field-file") c.field_file = get<std::string>(v, key);
    else if (key == "ansatz-support") c.ansatz_support = get<double>(v, key);
    else if (key == "epsilon-rule") c.epsilon_rule = parse_enum(kEpsilonNames, key, get<std::string>(v, key));
    else if (key == "epsilon") c.epsilon = get<double>(v, key);
    else if (key == "rotation") {
      const auto s = get<std::string>(v, key);
      if (s == "auto") c.rotation.reset();
      else c.rotation = parse_enum(kRotationNames, key, s);
    } else if (key == "offset") c.offset = parse_enum(kOffsetNames, key, get<std::string>(v, key));
    else if (key == "n-t") c.n_t = get<int>(v, key);
    else if (key == "n-z") c.n_z = get<int>(v, key);
    else if (key == "n-theta-min") c.n_theta_min = get<int>(v, key);
    else if (key == "theta-density") c.theta_density = get<double>(v, key);
    else if (key == "panel-order") c.panel_order = get<int>(v, key);
    else if (key == "refine") c.refine = get<int>(v, key);
    else if (key == "gamma") c.gamma = get<double>(v, key);
    else if (key == "passage-size") c.passage_size = get<double>(v, key);
    else if (key == "trials") c.trials = get<int>(v, key);
    else if (key == "slope-tol") c.slope_tol = get<double>(v, key);
    else if (key == "r2-floor") c.r2_floor = get<double>(v, key);
    else throw ConfigError(key, "unknown key");
  }
  return c;
}

void RunConfig::validate() const {
  if (!(p > 1.0 && std::isfinite(p))) {
    throw ConfigError("p", "the estimate requires 1 < p < infinity, got " + short_fmt(p));
  }
  if (num_h < 4) throw ConfigError("num-h", "need at least 4 values of h to fit a slope");
  if (!(h_min > 0.0 && h_min < h_max)) throw ConfigError("h-min", "need 0 < h-min < h-max");
  if (profile != "shell" && profile != "bump") {
    throw ConfigError("profile", "unknown profile '" + profile + "' (expected shell or bump)");
  }
  if (!(radius > 0.0)) throw ConfigError("radius", "must be positive");
  SurfacePtr s;
  try {
    s = make_surface();
  } catch (const std::exception& e) {
    throw ConfigError("surface", e.what());
  }
  const double h0 = chart_limit_h0(*s);
  if (!(h_max < h0)) {
    throw ConfigError("h-max", "must be below the chart limit h0 = " + short_fmt(h0));
  }
  if ((field == FieldChoice::random || field == FieldChoice::rigid) && seeds < 1) {
    throw ConfigError("seeds", "need at least one seed");
  }
  if (field == FieldChoice::file && field_file.empty()) {
    throw ConfigError("field-file", "field = file needs a CSV path");
  }
  if (!(ansatz_support > 0.0 && ansatz_support <= 1.0)) {
    throw ConfigError("ansatz-support", "must lie in (0, 1]");
  }
  if (epsilon_rule == EpsilonRule::fixed && !(epsilon > 0.0)) {
    throw ConfigError("epsilon", "must be positive");
  }
  if (n_t < 1 || n_z < 1 || n_theta_min < 1 || panel_order < 1 || refine < 1) {
    throw ConfigError("n-t", "grid counts must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must lie in [0, 1]");
  if (!(passage_size > 0.0)) throw ConfigError("passage-size", "must be positive");
  if (trials < 1) throw ConfigError("trials", "must be positive");
  if (!(slope_tol > 0.0)) throw ConfigError("slope-tol", "must be positive");
}

SurfacePtr RunConfig::make_surface() const {
  SurfaceSpec spec;
  spec.name = surface;
  spec.radius = radius;
  return rigidity::make_surface(spec);
}

ThicknessProfile RunConfig::make_profile(double hh, const SurfacePtr& s) const {
  if (profile == "bump") return ThicknessProfile::bump(hh, s->domain());
  return ThicknessProfile::shell(hh);
}

std::vector<double> geometric(double a, double b, int n) {
  if (n < 1 || !(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("geometric: bad arguments");
  if (n == 1) return {a};
  std::vector<double> v(n);
  const double la = std::log(a);
  const double lb = std::log(b);
  for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * i / (n - 1));
  v.front() = a;
  v.back() = b;
  return v;
}

std::vector<double> RunConfig::h_values() const { return geometric(h_min, h_max, num_h); }

GridResolution RunConfig::resolution_for(double hh, const CoordRect& rect) const {
  const auto round_up = [this](int n) { return n <= panel_order ? n : (n + panel_order - 1) / panel_order * panel_order; };
  GridResolution r;
  r.n_t = n_t * refine;
  r.n_z = round_up(n_z) * refine;
  const int nth = std::max(n_theta_min, static_cast<int>(std::ceil(theta_density * rect.theta_extent() / std::sqrt(hh))));
  r.n_theta = round_up(nth) * refine;
  return r;
}

double RunConfig::epsilon_for(double hh) const {
  switch (epsilon_rule) {
    case EpsilonRule::h: return hh;
    case EpsilonRule::h_squared: return hh * hh;
    case EpsilonRule::fixed: return epsilon;
  }
  return epsilon;
}

RotationRule RunConfig::rotation_rule() const {
  if (rotation) return *rotation;
  return field == FieldChoice::ansatz || field == FieldChoice::skew ? RotationRule::identity
                                                                   : RotationRule::best_fit;
}

AnsatzProfile RunConfig::ansatz_profile(const CoordRect& rect) const {
  AnsatzProfile a = AnsatzProfile::centered_on(rect);
  a.xi_half = ansatz_support * 0.5 * rect.theta_extent() / std::sqrt(h_max);
  return a;
}

FrameField make_displacement(const RunConfig& c, const SurfacePtr& surface, double h, int seed) {
  switch (c.field) {
    case FieldChoice::ansatz: {
      AnsatzProfile a = c.ansatz_profile(surface->domain());
      a.epsilon = c.epsilon_for(h);
      return ansatz_field(a, surface, h);
    }
    case FieldChoice::random:
      return random_smooth_field(static_cast<unsigned long long>(std::max(seed, 0)), c.amplitude,
                                 c.modes, surface);
    case FieldChoice::rigid:
      return rigid_displacement(surface, std::max(seed, 0));
    case FieldChoice::identity:
      return scaled(identity_displacement(surface), 0.0);
    case FieldChoice::skew:
      return affine_displacement(surface, c.amplitude * skew(Vec3(0.3, -0.5, 0.8)), Vec3::Zero(),
                                 "skew");
    case FieldChoice::file: {
      std::ifstream in(c.field_file);
      if (!in) throw ConfigError("field-file", "cannot open '" + c.field_file + "'");
      return SampledField::read_csv(in).to_field(FieldKind::displacement, c.field_file);
    }
  }
  throw std::logic_error("make_displacement: unhandled field");
}

ScalingFit fit_exponent(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 4) throw FitError("fit_exponent: need at least 4 pairs");
  for (const auto& [h, v] : pairs) {
    if (!(h > 0.0) || !(v > 0.0) || !std::isfinite(h) || !std::isfinite(v)) {
      throw FitError("fit_exponent: pair (h = " + short_fmt(h) + ", value = " + short_fmt(v) +
                     ") is not positive and finite");
    }
  }
  const std::size_t n = pairs.size();
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [h, v] : pairs) {
    mx += std::log(h);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [h, v] : pairs) {
    const double dx = std::log(h) - mx;
    const double dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw FitError("fit_exponent: all h values coincide");
  ScalingFit f;
  f.pairs = pairs;
  f.alpha_hat = sxy / sxx;
  f.intercept = my - f.alpha_hat * mx;
  double ss_res = 0.0;
  for (const auto& [h, v] : pairs) {
    const double r = std::log(v) - (f.intercept + f.alpha_hat * std::log(h));
    ss_res += r * r;
    f.max_residual = std::max(f.max_residual, std::abs(r));
  }
  f.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  if (syy > 0.0 && ss_res <= 1e-28 * syy) f.r2 = 1.0;
  return f;
}

SweepRow evaluate_at(const RunConfig& c, double h, int seed) {
  const SurfacePtr surface = c.make_surface();
  SweepRow row;
  const QuadratureGrid grid = grid_for(c, surface, h, row.grid);
  const FrameField y = make_deformation(c, surface, h, seed);
  const NodeSamples s = sample_field(y, grid);
  const Mat3 r = c.rotation_rule() == RotationRule::identity ? Mat3::Identity()
                                                             : best_fit_rotation(s, grid);
  std::optional<Vec3> b;
  if (c.offset == OffsetRule::zero) b = Vec3::Zero();
  const InequalityReport rep = interpolation_sides(s, r, b, grid, c.p);
  row.h = h;
  row.p = c.p;
  row.epsilon = c.field == FieldChoice::rigid ? 0.0 : c.epsilon_for(h);
  row.lhs = rep.lhs;
  row.rhs_product = rep.rhs_product;
  row.rhs_field_sq = rep.rhs_field_sq;
  row.rhs_dist_sq = rep.rhs_dist_sq;
  row.ratio = rep.ratio;
  row.status = rep.status;
  row.seed = seed;
  return row;
}

SweepResult run_sweep(const RunConfig& config) {
  return sweep_impl(config, "interpolation", false,
                    [&config](double h, int seed) { return evaluate_at(config, h, seed); });
}

SweepResult korn_sweep(const RunConfig& config) {
  return sweep_impl(config, "korn", true, [&config](double h, int seed) {
    const SurfacePtr surface = config.make_surface();
    SweepRow row;
    const QuadratureGrid grid = grid_for(config, surface, h, row.grid);
    const KornReport k = korn_linear_sides(make_displacement(config, surface, h, seed), grid, config.p);
    row.h = h;
    row.p = config.p;
    row.epsilon = 0.0;
    row.lhs = k.grad_sq;
    row.rhs_product = k.rhs_product;
    row.rhs_field_sq = k.field_sq;
    row.rhs_dist_sq = k.strain_sq;
    row.ratio = k.ratio;
    row.status = k.status;
    row.seed = seed;
    return row;
  });
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    out << fmt(r.h) << ',' << fmt(r.p) << ',' << fmt(r.epsilon) << ',' << fmt(r.lhs) << ','
        << fmt(r.rhs_product) << ',' << fmt(r.rhs_field_sq) << ',' << fmt(r.rhs_dist_sq) << ','
        << fmt(r.ratio) << ',' << r.grid.n_t << ',' << r.grid.n_theta << ',' << r.grid.n_z
        << '\n';
  }
}

nlohmann::json fit_json(const SweepResult& r) {
  nlohmann::json j;
  if (r.fit) {
    j["alpha_hat"] = r.fit->alpha_hat;
    j["intercept"] = r.fit->intercept;
    j["r2"] = r.fit->r2;
    j["max_residual"] = r.fit->max_residual;
  } else {
    j["alpha_hat"] = nullptr;
    j["intercept"] = nullptr;
    j["r2"] = nullptr;
    j["max_residual"] = nullptr;
  }
  j["config_echo"] = r.config.to_json();
  return j;
}

std::string summary_text(const SweepResult& r) {
  std::ostringstream s;
  s << r.quantity << " sweep: surface " << r.config.surface << ", profile " << r.config.profile
    << ", field " << to_string(r.config.field) << ", p = " << r.config.p << "\n";
  s << "h in [" << r.config.h_min << ", " << r.config.h_max << "], " << r.config.num_h
    << " values; epsilon rule " << to_string(r.config.epsilon_rule) << "\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const SweepRow& row = r.rows[i];
    s << "  h = " << std::setw(12) << short_fmt(row.h) << "  ratio = " << std::setw(12)
      << short_fmt(row.ratio) << "  [" << to_string(row.status) << "]";
    if (r.seed_ratios.size() > i && r.seed_ratios[i].size() > 1) s << "  max over " << r.seed_ratios[i].size() << " seeds";
    s << "\n";
  }
  if (r.failed()) s << "FAILED at h = " << short_fmt(*r.failed_h) << ": " << r.failure << "\n";
  if (r.fit) {
    s << "fit: alpha_hat = " << short_fmt(r.fit->alpha_hat) << ", intercept = "
      << short_fmt(r.fit->intercept) << ", R^2 = " << short_fmt(r.fit->r2)
      << ", max residual = " << short_fmt(r.fit->max_residual) << "\n";
  }
  s << "verdict (" << to_string(r.verdict.kind) << "): " << (r.verdict.pass ? "PASS" : "FAIL")
    << " - " << r.verdict.message << "\n";
  return s.str();
}

namespace {
void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}
}  // namespace

void write_sweep_outputs(const SweepResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "config.json", r.config.to_json().dump(2) + "\n");
  std::ostringstream csv;
  write_csv(csv, r.rows);
  write_file(dir / "sweep.csv", csv.str());
  nlohmann::json fj = fit_json(r);
  if (r.failed()) {
    fj["failed_h"] = *r.failed_h;
    fj["failure"] = r.failure;
  }
  write_file(dir / "fit.json", fj.dump(2) + "\n");
  write_file(dir / "summary.txt", summary_text(r));
}

nlohmann::json TraceResult::to_json() const {
  nlohmann::json j = {{"config_echo", config.to_json()},
                      {"partition", decomposition.to_json()},
                      {"trace", trace.to_json(true)},
                      {"rotation_audit", audit.to_json()},
                      {"all_checks_hold", all_checks_hold}};
  j["passage"] = passage ? passage->to_json() : nlohmann::json(nullptr);
  return j;
}

TraceResult run_trace(const RunConfig& config) {
  if (!(config.p > 1.0 && std::isfinite(config.p))) {
    throw ConfigError("p", "the estimate requires 1 < p < infinity, got " + short_fmt(config.p));
  }
  if (!(config.h > 0.0)) throw ConfigError("h", "must be positive");
  TraceResult r;
  r.config = config;
  const SurfacePtr surface = config.make_surface();
  const ThinDomain shell(surface, ThicknessProfile::shell(config.h));
  r.decomposition = partition(shell, config.gamma);
  const FrameField v = scaled(make_displacement(config, surface, config.h, static_cast<int>(config.seed)),
                              config.epsilon_for(config.h));
  r.trace = patch_trace(v, r.decomposition, shell, config.p);
  r.audit = rotation_audit(r.decomposition, shell, config.p, static_cast<std::size_t>(config.trials),
                           config.seed);
  const ThinDomain thin(surface, config.make_profile(config.h, surface));
  PassageOptions opts;
  opts.size_factor = config.passage_size;
  r.passage = shell_to_domain_trace(v, thin, config.p, opts);
  for (const PatchTrace& t : r.trace.patches) {
    r.all_checks_hold = r.all_checks_hold && t.gradient_split_holds && t.affine_split_holds &&
                        t.disc_bound_holds;
  }
  return r;
}

void write_trace_outputs(const TraceResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "config.json", r.config.to_json().dump(2) + "\n");
  std::ostringstream csv;
  csv << "patch,theta_min,theta_max,z_min,z_max,residual,dist_norm,field_norm,c_fjm,c_poincare,"
         "c_rotation,tau_star\n";
  for (const PatchTrace& t : r.trace.patches) {
    csv << t.index << ',' << fmt(t.rect.theta_min) << ',' << fmt(t.rect.theta_max) << ','
        << fmt(t.rect.z_min) << ',' << fmt(t.rect.z_max) << ',' << fmt(t.residual) << ','
        << fmt(t.dist_norm) << ',' << fmt(t.field_norm) << ',' << fmt(t.c_fjm) << ','
        << fmt(t.c_poincare) << ',' << fmt(t.c_rotation) << ',' << fmt(t.tau_star) << '\n';
  }
  write_file(dir / "trace.csv", csv.str());
  write_file(dir / "trace.json", r.to_json().dump(2) + "\n");
  std::ostringstream s;
  s << "trace: surface " << r.config.surface << ", h = " << r.config.h << ", gamma = "
    << r.config.gamma << ", p = " << r.config.p << ", " << r.decomposition.count() << " patches\n";
  s << "  max Poincare constant     " << short_fmt(r.trace.c_poincare_max) << "\n";
  s << "  min rotation-bound const  " << short_fmt(r.audit.min_constant) << " (" << r.audit.trials
    << " random rotations, worst-case offset)\n";
  s << "  aggregate constant        " << short_fmt(r.trace.c_aggregate) << "\n";
  s << "  min tau*                  " << short_fmt(r.trace.tau_star_min) << "\n";
  if (r.passage) {
    s << "  shell-to-domain constant  " << short_fmt(r.passage->c_final)
      << (r.passage->trivial ? " (constant profile: trivial)" : "") << "\n";
  }
  s << "per-patch triangle and disc bounds: " << (r.all_checks_hold ? "PASS" : "FAIL") << "\n";
  write_file(dir / "summary.txt", s.str());
}

nlohmann::json GradientCheck::to_json() const {
  return {{"surface", surface}, {"field", field},         {"points", points},
          {"step", step},       {"max_error", max_error}, {"max_error_half", max_error_half},
          {"order", order}};
}

GradientCheck check_gradient(const SurfacePtr& surface, const std::string& field, double h,
                             std::size_t points, double step, unsigned long long seed) {
  const ThinDomain domain(surface, ThicknessProfile::shell(h));
  FrameField f = [&]() -> FrameField {
    if (field == "polynomial") return polynomial_test_field(surface);
    if (field == "random") return identity_plus(surface, 1.0, random_smooth_field(seed, 0.2, 3, surface));
    if (field == "ansatz") {
      AnsatzProfile a = AnsatzProfile::centered_on(surface->domain());
      a.xi_half = 0.2 * surface->domain().theta_extent() / std::sqrt(h);
      return ansatz_field(a, surface, h);
    }
    throw ConfigError("field", "unknown test field '" + field + "' (expected polynomial, random or ansatz)");
  }();
  const CoordRect& r = surface->domain();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GradientCheck c;
  c.surface = std::string(surface->name());
  c.field = field;
  c.points = points;
  c.step = step;
  double sum = 0.0;
  double sum_half = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double th = r.theta_min + r.theta_extent() * (0.05 + 0.9 * u(rng));
    const double z = r.z_min + r.z_extent() * (0.05 + 0.9 * u(rng));
    const double t = h * 0.45 * (2.0 * u(rng) - 1.0);
    const Mat3 g = frame_gradient(f, *surface, t, th, z);
    const double e = (g - euclidean_gradient_oracle(f, domain, t, th, z, step)).norm();
    const double e2 = (g - euclidean_gradient_oracle(f, domain, t, th, z, 0.5 * step)).norm();
    c.max_error = std::max(c.max_error, e);
    c.max_error_half = std::max(c.max_error_half, e2);
    sum += e;
    sum_half += e2;
  }
  c.order = sum_half > 0.0 ? std::log2(sum / sum_half) : kNaN;
  return c;
}

}  // namespace rigidity
