// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "rigidity/experiments.hpp"
#include "rigidity/inequality.hpp"
#include "rigidity/localization.hpp"
#include "rigidity/matrixops.hpp"
#include "rigidity/so3_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rigidity;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    s_ << v;
    return *this;
  }
  std::string str() const { return s_.str(); }

 private:
  std::ostringstream s_;
};

int failures = 0;

void criterion(int n, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s [%s] (%.1f s)\n", o.pass ? "PASS" : "FAIL", n, title,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

Mat3 haar_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  double q[4], n = 0.0;
  do {
    for (double& c : q) c = g(rng);
    n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  } while (n < 1e-9);
  return rotation_from_quaternion(q[0] / n, q[1] / n, q[2] / n, q[3] / n);
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

std::string list(const std::vector<double>& v) {
  std::ostringstream s;
  s.precision(3);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i];
  return s.str();
}

SurfacePtr surface_named(const std::string& name) {
  SurfaceSpec spec;
  spec.name = name;
  return make_surface(spec);
}

// Frame gradient against the finite-difference oracle: error <= 1e-5 at step
// 1e-4 and second-order convergence (errors summed over the three fields of
// each surface, since polynomial fields on the plate are exact to rounding).
Outcome frame_gradient_check() {
  Outcome o;
  Detail d;
  double worst = 0.0;
  for (const char* name : {"sphere", "cylinder", "plate", "pseudospherical"}) {
    double sum = 0.0, sum_half = 0.0;
    for (const char* field : {"polynomial", "random", "ansatz"}) {
      const GradientCheck g = check_gradient(surface_named(name), field, 0.1, 100, 1e-4, 1);
      worst = std::max(worst, g.max_error);
      sum += g.max_error;
      sum_half += g.max_error_half;
    }
    const double order = std::log2(sum / sum_half);
    d << name << " order " << order << "; ";
    if (!(order >= 1.8 && order <= 2.2)) o.pass = false;
  }
  d << "max error " << worst << " (tol 1e-5)";
  if (!(worst <= 1e-5)) o.pass = false;
  o.detail = d.str();
  return o;
}

Outcome dist_so3_check() {
  const oracle::SelfTestReport r = oracle::dist_so3_selftest(200, 1u << 17, 1e-2, 2024);
  const double d1 = dist_so3(Vec3(2, 1, 1).asDiagonal().toDenseMatrix());
  const double d2 = dist_so3(Vec3(1, 1, -1).asDiagonal().toDenseMatrix());
  Outcome o;
  o.pass = r.passed && r.rotation_count >= 100000 && r.cases.size() == 202 &&
           r.negative_determinant_cases > 0 && std::abs(d1 - 1.0) <= 1e-12 &&
           std::abs(d2 - 2.0) <= 1e-12;
  Detail d;
  d << r.cases.size() << " matrices (" << r.negative_determinant_cases << " with det < 0), "
    << r.rotation_count << " rotations, max |formula - brute force| " << r.max_abs_error
    << " (tol 1e-2); diag(2,1,1) -> " << d1 << ", diag(1,1,-1) -> " << d2;
  o.detail = d.str();
  return o;
}

Outcome rigid_motion_check() {
  const auto sphere = make_sphere();
  const double h = 1e-2;
  const RunConfig cfg;
  const ThinDomain domain(sphere, ThicknessProfile::shell(h));
  const QuadratureGrid grid = build_grid(domain, cfg.resolution_for(h, domain.rect()));
  std::mt19937_64 rng(20);
  std::normal_distribution<double> g;
  Outcome o;
  double worst_scaled = 0.0;
  for (double p : {2.0, 3.0}) {
    const double floor = 1e-10 * std::pow(grid.volume(), 2.0 / p);
    for (int k = 0; k < 20; ++k) {
      const Mat3 q = haar_rotation(rng);
      const Vec3 c(g(rng), g(rng), g(rng));
      const InequalityReport r = interpolation_sides(rigid_field(sphere, q, c), q, c, grid, p);
      const double m = std::max({r.lhs, r.rhs_product, r.rhs_field_sq, r.rhs_dist_sq});
      worst_scaled = std::max(worst_scaled, m / floor);
      if (!(m <= floor) || r.status != ReportStatus::degenerate_exact) o.pass = false;
    }
  }
  Detail d;
  d << "20 rigid motions, p = 2 and 3; largest term / (1e-10 vol^(2/p)) = " << worst_scaled;
  o.detail = d.str();
  return o;
}

Outcome equivalence_property() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const double h = 1e-4 * std::pow(0.5 / 1e-4, u(rng));
    const double a = std::pow(10.0, 6.0 * u(rng) - 3.0);
    const double b = std::pow(10.0, 6.0 * u(rng) - 3.0);
    const EquivalenceRecord r = equivalence_check(a, b, h);
    if (!r.upper_holds || !r.lower_holds || !r.amgm_holds) ++violations;
    // The closed-form minimiser must not be beaten on a fine s grid.
    for (int i = 0; i <= 40; ++i) {
      const BalanceForm f = balance_form(a, b, h, 0.05 * i);
      if (f.term_field + f.term_dist < r.e2_star * (1 - 1e-12)) ++violations;
    }
  }
  Detail d;
  d << "10000 triples, h in (1e-4, 0.5): " << violations << " violations";
  return {violations == 0, d.str()};
}

Outcome sharpness_check(std::vector<double>& interp, std::vector<double>& korn) {
  const RunConfig cfg;
  const SweepResult a = run_sweep(cfg);
  const SweepResult b = korn_sweep(cfg);
  Outcome o;
  Detail d;
  for (const SweepResult* r : {&a, &b}) {
    if (r->failed() || !r->fit) {
      o.pass = false;
      d << r->quantity << " failed: " << r->failure << "; ";
      continue;
    }
    d << r->quantity << " alpha_hat " << r->fit->alpha_hat << " R^2 " << r->fit->r2 << " ratios "
      << r->rows.front().ratio << ".." << r->rows.back().ratio << "; ";
    if (!(std::abs(r->fit->alpha_hat) <= 0.2)) o.pass = false;
  }
  for (const auto& r : a.rows) interp.push_back(r.ratio);
  for (const auto& r : b.rows) korn.push_back(r.ratio);
  d << "|alpha_hat| <= 0.2";
  o.detail = d.str();
  return o;
}

Outcome validity_check() {
  Outcome o;
  Detail d;
  for (const char* name : {"sphere", "pseudospherical"}) {
    RunConfig cfg;
    cfg.surface = name;
    cfg.field = FieldChoice::random;
    cfg.seeds = 20;
    const SweepResult r = run_sweep(cfg);
    if (r.failed() || !r.fit) {
      o.pass = false;
      d << name << " failed: " << r.failure << "; ";
      continue;
    }
    d << name << " slope " << r.fit->alpha_hat << "; ";
    if (!(r.fit->alpha_hat >= -0.2)) o.pass = false;
  }
  d << "slope >= -0.2 (20 seeds, per-h maximum)";
  o.detail = d.str();
  return o;
}

Outcome localization_check() {
  const auto sphere = make_sphere();
  const std::vector<double> hs{1e-1, 3e-2, 1e-2, 3e-3};
  std::vector<double> poincare, rotation, passage;
  bool checks = true;
  for (double h : hs) {
    const ThinDomain shell(sphere, ThicknessProfile::shell(h));
    const PatchDecomposition dec = partition(shell, 0.5);
    double c_poincare = 0.0;
    for (unsigned long long seed = 1; seed <= 5; ++seed) {
      const FrameField v = scaled(random_smooth_field(seed, 1.0, 3, sphere), h);
      const TraceSummary t = patch_trace(v, dec, shell, 2.0);
      c_poincare = std::max(c_poincare, t.c_poincare_max);
      for (const PatchTrace& p : t.patches) {
        checks = checks && p.gradient_split_holds && p.affine_split_holds;
      }
    }
    poincare.push_back(c_poincare);
    rotation.push_back(rotation_audit(dec, shell, 2.0, 1000, 7).min_constant);

    const ThinDomain bump(sphere, ThicknessProfile::bump(h, sphere->domain()));
    double c_passage = 0.0;
    for (unsigned long long seed = 1; seed <= 5; ++seed) {
      const FrameField v = scaled(random_smooth_field(seed, 1.0, 3, sphere), h);
      c_passage = std::max(c_passage, shell_to_domain_trace(v, bump, 2.0).c_symmetric);
    }
    passage.push_back(c_passage);
  }
  Detail d;
  d << "h = 1e-1, 3e-2, 1e-2, 3e-3; Poincare max " << list(poincare) << " (spread "
    << spread(poincare) << "); rotation bound min " << list(rotation) << " (spread "
    << spread(rotation) << "); passage " << list(passage) << " (spread " << spread(passage)
    << "); spread <= 5";
  const bool bounded = spread(poincare) <= 5.0 && spread(rotation) <= 5.0 &&
                       spread(passage) <= 5.0 &&
                       *std::min_element(rotation.begin(), rotation.end()) > 0.0;
  return {bounded && checks, d.str()};
}

Outcome doubling_check() {
  Outcome o;
  Detail d;
  const double r_max = 0.1;
  for (const char* name : {"sphere", "plate"}) {
    const SurfacePtr s = surface_named(name);
    const CoordRect rect = s->domain();
    // Coordinate margin keeping every ball of radius 2 r_max inside the patch
    // (the sphere's theta scale factor is at least sin(1.07) > 0.87).
    const double margin = std::string(name) == "sphere" ? 2.0 * r_max / 0.87 : 2.0 * r_max;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ut(rect.theta_min + margin, rect.theta_max - margin);
    std::uniform_real_distribution<double> uz(rect.z_min + margin, rect.z_max - margin);
    double worst = 0.0, small_dev = 0.0;
    for (int c = 0; c < 20; ++c) {
      const double theta = ut(rng), z = uz(rng);
      for (double r : {0.01, 0.02, 0.05, 0.1}) {
        const DoublingEstimate e = doubling_ratio(*s, theta, z, r);
        worst = std::max(worst, e.ratio);
        if (r == 0.01) small_dev = std::max(small_dev, std::abs(e.ratio - 0.25));
      }
    }
    d << name << " max " << worst << ", |ratio - 0.25| at r = 0.01 <= " << small_dev << "; ";
    if (!(worst <= 0.3) || !(small_dev <= 0.02)) o.pass = false;
  }
  d << "20 centres, r in [0.01, 0.1]";
  o.detail = d.str();
  return o;
}

Outcome quadrature_gate(const std::vector<double>& interp, const std::vector<double>& korn) {
  Outcome o;
  Detail d;
  RunConfig fine;
  fine.refine = 2;
  const SweepResult a = run_sweep(fine);
  const SweepResult b = korn_sweep(fine);
  double change = 0.0;
  if (a.failed() || b.failed() || a.rows.size() != interp.size() || b.rows.size() != korn.size()) {
    return {false, "refined sweep failed: " + a.failure + b.failure};
  }
  for (std::size_t i = 0; i < interp.size(); ++i) {
    change = std::max(change, std::abs(a.rows[i].ratio - interp[i]) / a.rows[i].ratio);
    change = std::max(change, std::abs(b.rows[i].ratio - korn[i]) / b.rows[i].ratio);
  }
  d << "max relative change under refine = 2: " << change << " (< 1%); ";
  if (!(change < 0.01)) o.pass = false;

  const RunConfig cfg;
  const GridResolution res{cfg.n_t, cfg.n_theta_min, cfg.n_z};
  double plate_err = 0.0, sphere_err = 0.0;
  const auto full_sphere =
      make_sphere(1.0, {-std::numbers::pi, std::numbers::pi, 0.0, std::numbers::pi});
  const auto patch = make_sphere();
  for (double h : {1e-3, 1e-2, 1e-1}) {
    const double shell = h + h * h * h / 12.0;  // radial integral of (1 + t)^2 over (-h/2, h/2)
    plate_err = std::max(
        plate_err, std::abs(build_grid(ThinDomain(make_plate(), ThicknessProfile::shell(h)), res).volume() - h));
    sphere_err = std::max(
        sphere_err,
        std::abs(build_grid(ThinDomain(full_sphere, ThicknessProfile::shell(h)), res).volume() -
                 4.0 * std::numbers::pi * shell));
    sphere_err = std::max(
        sphere_err, std::abs(build_grid(ThinDomain(patch, ThicknessProfile::shell(h)), res).volume() -
                             2.0 * std::sin(0.5) * shell));
  }
  d << "volume error plate " << plate_err << " (<= 1e-10), sphere " << sphere_err << " (<= 1e-8)";
  if (!(plate_err <= 1e-10) || !(sphere_err <= 1e-8)) o.pass = false;
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  std::vector<double> interp, korn;
  criterion(1, "frame gradient matches the Euclidean oracle", frame_gradient_check);
  criterion(2, "distance to SO(3) matches brute force", dist_so3_check);
  criterion(3, "rigid motions annihilate every term", rigid_motion_check);
  criterion(4, "product and balance forms are equivalent", equivalence_property);
  criterion(5, "ansatz ratios are flat in h (sharpness)",
            [&] { return sharpness_check(interp, korn); });
  criterion(6, "random battery ratios do not blow up (validity)", validity_check);
  criterion(7, "localization constants are uniform in h", localization_check);
  criterion(8, "doubling ratio bounded and flat-limit 1/4", doubling_check);
  criterion(9, "quadrature gate", [&] { return quadrature_gate(interp, korn); });
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
