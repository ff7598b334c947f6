#include "rigidity/localization.hpp"

#include "rigidity/errors.hpp"
#include "rigidity/matrixops.hpp"
#include "rigidity/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace rigidity {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio_or_nan(double num, double den) { return den > 0.0 ? num / den : kNaN; }

// Maximum/minimum that skip NaN entries; NaN when every entry is NaN.
double nan_max(double acc, double v) { return std::isnan(acc) ? v : (std::isnan(v) ? acc : std::max(acc, v)); }
double nan_min(double acc, double v) { return std::isnan(acc) ? v : (std::isnan(v) ? acc : std::min(acc, v)); }

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json matrix_json(const Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

std::string describe(const CoordRect& r) {
  std::ostringstream s;
  s << "[" << r.theta_min << ", " << r.theta_max << "] x [" << r.z_min << ", " << r.z_max << "]";
  return s.str();
}

// Physical lengths of the centre lines theta -> r(theta, z_c) and z -> r(theta_c, z).
std::pair<double, double> centre_line_lengths(const ThinDomain& domain) {
  const CoordRect& rect = domain.rect();
  const QuadratureRule qt = composite_gauss_legendre(rect.theta_min, rect.theta_max, 32);
  const QuadratureRule qz = composite_gauss_legendre(rect.z_min, rect.z_max, 32);
  double lt = 0.0;
  double lz = 0.0;
  for (std::size_t i = 0; i < qt.nodes.size(); ++i) {
    lt += qt.weights[i] * domain.surface().evaluate(qt.nodes[i], rect.z_center()).a_theta;
  }
  for (std::size_t i = 0; i < qz.nodes.size(); ++i) {
    lz += qz.weights[i] * domain.surface().evaluate(rect.theta_center(), qz.nodes[i]).a_z;
  }
  return {lt, lz};
}

PatchDecomposition tile(const ThinDomain& domain, int m_theta, int m_z, double lt, double lz) {
  PatchDecomposition d;
  d.h = domain.h();
  d.m_theta = m_theta;
  d.m_z = m_z;
  d.cell_length_theta = lt / m_theta;
  d.cell_length_z = lz / m_z;
  const CoordRect& rect = domain.rect();
  const double dt = rect.theta_extent() / m_theta;
  const double dz = rect.z_extent() / m_z;
  d.patches.reserve(static_cast<std::size_t>(m_theta) * m_z);
  for (int i = 0; i < m_theta; ++i) {
    for (int j = 0; j < m_z; ++j) {
      CoordRect c;
      c.theta_min = rect.theta_min + i * dt;
      c.theta_max = i + 1 == m_theta ? rect.theta_max : rect.theta_min + (i + 1) * dt;
      c.z_min = rect.z_min + j * dz;
      c.z_max = j + 1 == m_z ? rect.z_max : rect.z_min + (j + 1) * dz;
      d.patches.push_back(c);
    }
  }
  return d;
}

void check_patch_resolution(const PatchDecomposition& dec, const GridResolution& res) {
  if (res.n_t < 4 || res.n_theta < 4 || res.n_z < 4) {
    std::ostringstream msg;
    msg << "patch 0 " << (dec.patches.empty() ? std::string("?") : describe(dec.patches.front()))
        << " is under-resolved: need at least 4 nodes per direction, got " << res.n_t << "x"
        << res.n_theta << "x" << res.n_z;
    throw ResolutionError(msg.str());
  }
}

std::vector<double> weights_of(const QuadratureGrid& grid) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = grid.nodes[i].weight;
  return w;
}

std::vector<Vec3> node_positions(const QuadratureGrid& grid) {
  std::vector<Vec3> x(grid.size());
  const ParamSurface& s = grid.domain.surface();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridNode& n = grid.nodes[i];
    const SurfacePoint sp = s.evaluate(n.theta, n.z);
    x[i] = sp.position + n.t * sp.normal;
  }
  return x;
}

Vec3 weighted_mean(const std::vector<Vec3>& v, const std::vector<double>& w) {
  Vec3 acc = Vec3::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += w[i] * v[i];
    total += w[i];
  }
  return acc / total;
}

double norm_of(const std::vector<Vec3>& v, const std::vector<double>& w, double p) {
  std::vector<double> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i].norm();
  return lp_norm_weighted(m, w, p);
}

double norm_of(const std::vector<Mat3>& v, const std::vector<double>& w, double p) {
  std::vector<double> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i].norm();
  return lp_norm_weighted(m, w, p);
}

struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
};

AxisAngle axis_angle(const Mat3& r) {
  AxisAngle a;
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  a.angle = std::acos(c);
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (w.norm() > 1e-8) {
    a.axis = w.normalized();
  } else {
    // Angle near 0 or pi: the axis is the column of R + I with the largest norm.
    const Mat3 s = r + Mat3::Identity();
    int k = 0;
    for (int j = 1; j < 3; ++j) {
      if (s.col(j).norm() > s.col(k).norm()) k = j;
    }
    if (s.col(k).norm() > 0.0) a.axis = s.col(k).normalized();
  }
  return a;
}

// Median projected radius about the rotation centre; see PatchTrace::tau_star.
double median_projected_radius(const Mat3& r, const Vec3& b, const std::vector<Vec3>& x,
                               const std::vector<double>& w) {
  const AxisAngle aa = axis_angle(r);
  const Vec3 n = aa.axis;
  Vec3 e1 = n.unitOrthogonal();
  Vec3 e2 = n.cross(e1);
  // (I - R) restricted to the plane orthogonal to n, in the basis (e1, e2).
  const Mat3 a = Mat3::Identity() - r;
  Eigen::Matrix2d m;
  m << e1.dot(a * e1), e1.dot(a * e2), e2.dot(a * e1), e2.dot(a * e2);
  const Eigen::Vector2d rhs(e1.dot(b), e2.dot(b));
  const Eigen::Vector2d cc = m.partialPivLu().solve(rhs);
  const Vec3 centre = cc[0] * e1 + cc[1] * e2;

  std::vector<std::pair<double, double>> rw(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec3 d = x[i] - centre;
    d -= d.dot(n) * n;
    rw[i] = {d.norm(), w[i]};
    total += w[i];
  }
  std::sort(rw.begin(), rw.end());
  // Largest radius with at least half of the weight at or beyond it.
  double tail = total;
  double best = 0.0;
  for (const auto& [rad, wt] : rw) {
    if (tail >= 0.5 * total) best = rad;
    tail -= wt;
  }
  return best;
}

Mat3 haar_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double q[4];
  double nrm = 0.0;
  do {
    for (double& c : q) c = g(rng);
    nrm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  } while (nrm < 1e-12);
  return rotation_from_quaternion(q[0] / nrm, q[1] / nrm, q[2] / nrm, q[3] / nrm);
}

}  // namespace

nlohmann::json PatchDecomposition::to_json() const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& r : patches) cells.push_back(rigidity::to_json(r));
  return {{"gamma", gamma},
          {"h", h},
          {"target_size", target_size},
          {"m_theta", m_theta},
          {"m_z", m_z},
          {"count", count()},
          {"cell_length_theta", cell_length_theta},
          {"cell_length_z", cell_length_z},
          {"degenerate", degenerate},
          {"patches", cells}};
}

PatchDecomposition partition(const ThinDomain& domain, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw DomainError("partition: gamma must lie in [0, 1]");
  }
  const auto [lt, lz] = centre_line_lengths(domain);
  const double size = std::pow(domain.h(), gamma);
  if (gamma == 0.0) {
    PatchDecomposition d = tile(domain, 1, 1, lt, lz);
    d.gamma = 0.0;
    d.target_size = size;
    d.degenerate = true;
    return d;
  }
  const int mt = static_cast<int>(std::floor(lt / size + 1e-9));
  const int mz = static_cast<int>(std::floor(lz / size + 1e-9));
  if (mt < 2 || mz < 2) {
    std::ostringstream msg;
    msg << "partition: h too large for gamma = " << gamma << " (h^gamma = " << size
        << " gives " << mt << " x " << mz << " cells on a patch of physical size " << lt << " x "
        << lz << "; need at least 2 per direction)";
    throw ResolutionError(msg.str());
  }
  PatchDecomposition d = tile(domain, mt, mz, lt, lz);
  d.gamma = gamma;
  d.target_size = size;
  return d;
}

PatchDecomposition partition_by_size(const ThinDomain& domain, double size) {
  if (!(size > 0.0)) throw DomainError("partition_by_size: size must be positive");
  const auto [lt, lz] = centre_line_lengths(domain);
  const int mt = std::max(1, static_cast<int>(std::floor(lt / size + 1e-9)));
  const int mz = std::max(1, static_cast<int>(std::floor(lz / size + 1e-9)));
  PatchDecomposition d = tile(domain, mt, mz, lt, lz);
  d.gamma = std::log(size) / std::log(domain.h());
  d.target_size = size;
  d.degenerate = mt == 1 && mz == 1;
  return d;
}

nlohmann::json PatchTrace::to_json() const {
  return {{"index", index},
          {"rect", rigidity::to_json(rect)},
          {"rotation", matrix_json(rotation)},
          {"offset", {offset[0], offset[1], offset[2]}},
          {"volume", volume},
          {"grad_norm", grad_norm},
          {"residual", residual},
          {"dist_norm", dist_norm},
          {"field_norm", field_norm},
          {"identity_gap", identity_gap},
          {"poincare_lhs", poincare_lhs},
          {"affine_residual", affine_residual},
          {"c_fjm", num(c_fjm)},
          {"c_poincare", num(c_poincare)},
          {"c_rotation", num(c_rotation)},
          {"gradient_split_holds", gradient_split_holds},
          {"affine_split_holds", affine_split_holds},
          {"rotation_trivial", rotation_trivial},
          {"tau_star", num(tau_star)},
          {"disc_bound_holds", disc_bound_holds}};
}

nlohmann::json TraceSummary::to_json(bool include_patches) const {
  nlohmann::json j = {{"gamma", gamma},
                      {"h", h},
                      {"p", p},
                      {"patch_count", patches.size()},
                      {"grad_norm", grad_norm},
                      {"field_norm", field_norm},
                      {"dist_norm", dist_norm},
                      {"c_aggregate", num(c_aggregate)},
                      {"c_fjm_max", num(c_fjm_max)},
                      {"c_poincare_max", num(c_poincare_max)},
                      {"c_rotation_min", num(c_rotation_min)},
                      {"tau_star_min", num(tau_star_min)}};
  if (include_patches) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : patches) rows.push_back(t.to_json());
    j["patches"] = rows;
  }
  return j;
}

TraceSummary patch_trace(const FrameField& v, const PatchDecomposition& decomposition,
                         const ThinDomain& domain, double p, PatchOptions options) {
  check_exponent(p);
  if (v.kind() != FieldKind::displacement) {
    throw std::invalid_argument("patch_trace: expects a displacement v (deformation x + v)");
  }
  check_patch_resolution(decomposition, options.resolution);
  const double h = domain.h();
  const double gamma = decomposition.gamma;
  const double hg = std::pow(h, gamma);
  const double hg1 = std::pow(h, 1.0 - gamma);

  std::vector<PatchTrace> traces(decomposition.count());
  parallel_for(
      traces.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          PatchTrace& tr = traces[k];
          tr.index = k;
          tr.rect = decomposition.patches[k];
          const QuadratureGrid grid = build_grid(domain.restricted(tr.rect), options.resolution);
          const NodeSamples s = sample_field(v, grid);
          const std::vector<double> w = weights_of(grid);
          const std::size_t n = grid.size();

          std::vector<Mat3> f(n);
          for (std::size_t i = 0; i < n; ++i) f[i] = Mat3::Identity() + s.gradient[i];
          const Mat3 r = best_fit_rotation_l2(f, w).rotation;
          const Mat3 ir = Mat3::Identity() - r;

          std::vector<Vec3> shifted(n);
          std::vector<Vec3> affine(n);
          std::vector<Mat3> dev(n);
          for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = s.value[i] + ir * s.position[i];
            dev[i] = f[i] - r;
          }
          const Vec3 b = weighted_mean(shifted, w);
          for (std::size_t i = 0; i < n; ++i) {
            shifted[i] -= b;
            affine[i] = ir * s.position[i] - b;
          }

          tr.rotation = r;
          tr.offset = b;
          tr.volume = grid.volume();
          tr.grad_norm = norm_of(s.gradient, w, p);
          tr.residual = norm_of(dev, w, p);
          tr.dist_norm = lp_norm_weighted(s.dist, w, p);
          tr.field_norm = norm_of(s.value, w, p);
          tr.identity_gap = ir.norm() * std::pow(tr.volume, 1.0 / p);
          tr.poincare_lhs = norm_of(shifted, w, p);
          tr.affine_residual = norm_of(affine, w, p);

          tr.c_fjm = ratio_or_nan(tr.residual * hg1, tr.dist_norm);
          tr.c_poincare = ratio_or_nan(tr.poincare_lhs, hg * tr.residual);
          const double slack = 1e-12 * (tr.grad_norm + tr.identity_gap + tr.residual) + 1e-300;
          tr.gradient_split_holds = tr.grad_norm <= tr.identity_gap + tr.residual + slack;
          tr.affine_split_holds = tr.affine_residual <=
                                  tr.field_norm + tr.poincare_lhs +
                                      1e-12 * (tr.field_norm + tr.poincare_lhs) + 1e-300;
          tr.rotation_trivial = ir.norm() < 1e-13;
          if (tr.rotation_trivial) {
            tr.c_rotation = kNaN;
            tr.tau_star = kNaN;
            tr.disc_bound_holds = true;
          } else {
            tr.c_rotation = ratio_or_nan(tr.affine_residual, hg * tr.identity_gap);
            const double tau_len = median_projected_radius(r, b, s.position, w);
            tr.tau_star = tau_len / hg;
            const double op = 2.0 * std::sin(0.5 * axis_angle(r).angle);
            const double lower = std::pow(tau_len * op, p) * tr.volume / 2.0;
            tr.disc_bound_holds = std::pow(tr.affine_residual, p) >= lower * (1.0 - 1e-10);
          }
        }
      },
      1);

  TraceSummary sum;
  sum.gamma = gamma;
  sum.h = h;
  sum.p = p;
  double gp = 0.0;
  double fp = 0.0;
  double dp = 0.0;
  sum.c_fjm_max = kNaN;
  sum.c_poincare_max = kNaN;
  sum.c_rotation_min = kNaN;
  sum.tau_star_min = kNaN;
  for (const PatchTrace& t : traces) {
    gp += std::pow(t.grad_norm, p);
    fp += std::pow(t.field_norm, p);
    dp += std::pow(t.dist_norm, p);
    sum.c_fjm_max = nan_max(sum.c_fjm_max, t.c_fjm);
    sum.c_poincare_max = nan_max(sum.c_poincare_max, t.c_poincare);
    sum.c_rotation_min = nan_min(sum.c_rotation_min, t.c_rotation);
    sum.tau_star_min = nan_min(sum.tau_star_min, t.tau_star);
  }
  sum.grad_norm = std::pow(gp, 1.0 / p);
  sum.field_norm = std::pow(fp, 1.0 / p);
  sum.dist_norm = std::pow(dp, 1.0 / p);
  sum.c_aggregate = ratio_or_nan(sum.grad_norm, sum.field_norm / hg + sum.dist_norm / hg1);
  sum.patches = std::move(traces);
  return sum;
}

RotationBoundCheck rotation_lower_bound_check(const Mat3& rotation, std::optional<Vec3> b,
                                              const QuadratureGrid& patch_grid, double p,
                                              double scale) {
  check_exponent(p);
  if (!is_rotation(rotation, 1e-10)) {
    throw std::invalid_argument("rotation_lower_bound_check: R is not a rotation");
  }
  const std::vector<Vec3> x = node_positions(patch_grid);
  const std::vector<double> w = weights_of(patch_grid);
  const Mat3 ir = Mat3::Identity() - rotation;
  std::vector<Vec3> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = ir * x[i];
  RotationBoundCheck c;
  c.offset = b ? *b : weighted_mean(a, w);
  for (auto& ai : a) ai -= c.offset;
  c.lhs = norm_of(a, w, p);
  c.rhs = scale * ir.norm() * std::pow(patch_grid.volume(), 1.0 / p);
  c.vacuous = ir.norm() < 1e-13;
  c.constant = c.vacuous ? kNaN : ratio_or_nan(c.lhs, c.rhs);
  return c;
}

nlohmann::json RotationAudit::to_json() const {
  return {{"trials", trials}, {"min_constant", num(min_constant)}, {"max_constant", num(max_constant)}};
}

RotationAudit rotation_audit(const PatchDecomposition& decomposition, const ThinDomain& domain,
                             double p, std::size_t trials, unsigned long long seed,
                             PatchOptions options) {
  check_exponent(p);
  check_patch_resolution(decomposition, options.resolution);
  std::mt19937_64 rng(seed);
  std::vector<Mat3> rotations(trials);
  for (auto& r : rotations) r = haar_rotation(rng);
  const double scale = std::pow(domain.h(), decomposition.gamma);

  std::vector<double> lo(decomposition.count(), kNaN);
  std::vector<double> hi(decomposition.count(), kNaN);
  parallel_for(
      decomposition.count(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          const QuadratureGrid grid =
              build_grid(domain.restricted(decomposition.patches[k]), options.resolution);
          for (const Mat3& r : rotations) {
            const double c = rotation_lower_bound_check(r, std::nullopt, grid, p, scale).constant;
            lo[k] = nan_min(lo[k], c);
            hi[k] = nan_max(hi[k], c);
          }
        }
      },
      1);
  RotationAudit audit;
  audit.trials = trials;
  audit.min_constant = kNaN;
  audit.max_constant = kNaN;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    audit.min_constant = nan_min(audit.min_constant, lo[k]);
    audit.max_constant = nan_max(audit.max_constant, hi[k]);
  }
  return audit;
}

nlohmann::json PassageReport::to_json() const {
  return {{"h", h},
          {"p", p},
          {"patch_count", patch_count},
          {"trivial", trivial},
          {"grad_domain", grad_domain},
          {"grad_shell", grad_shell},
          {"dist_domain", dist_domain},
          {"c_final", num(c_final)},
          {"c_symmetric", num(c_symmetric)},
          {"c_shell_fit", num(c_shell_fit)},
          {"c_domain_fit", num(c_domain_fit)},
          {"c_rotation_gap", num(c_rotation_gap)},
          {"c_chain", num(c_chain)},
          {"volume_ratio_min", volume_ratio_min},
          {"volume_ratio_max", volume_ratio_max}};
}

PassageReport shell_to_domain_trace(const FrameField& v, const ThinDomain& domain, double p,
                                    PassageOptions options) {
  check_exponent(p);
  if (v.kind() != FieldKind::displacement) {
    throw std::invalid_argument("shell_to_domain_trace: expects a displacement v");
  }
  const double h = domain.h();
  const ThinDomain shell = domain.with_profile(ThicknessProfile::shell(h));
  const PatchDecomposition dec = partition_by_size(domain, options.size_factor * h);
  check_patch_resolution(dec, options.resolution);

  struct Row {
    double grad_w = 0, grad_s = 0, dist_w = 0, dist_s = 0;
    double fit_s = 0, fit_w = 0, gap = 0, vol_w = 0, vol_s = 0;
  };
  std::vector<Row> rows(dec.count());
  const ThicknessProfile& prof = domain.profile();
  parallel_for(
      rows.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          const CoordRect& rect = dec.patches[k];
          const QuadratureGrid gw = build_grid(domain.restricted(rect), options.resolution);
          for (std::size_t i = 0; i < gw.size(); i += options.resolution.n_t) {
            const GridNode& nd = gw.nodes[i];
            if (prof.g1(nd.theta, nd.z) < 0.5 * h || prof.g2(nd.theta, nd.z) < 0.5 * h) {
              std::ostringstream msg;
              msg << "shell t in (-h/2, h/2) is not contained in the thin domain at (theta, z) = ("
                  << nd.theta << ", " << nd.z << "), patch " << k << "; the profile violates h <= g";
              throw AdmissibilityError(msg.str());
            }
          }
          const QuadratureGrid gs = build_grid(shell.restricted(rect), options.resolution);
          const NodeSamples sw = sample_field(v, gw);
          const NodeSamples ss = sample_field(v, gs);
          const std::vector<double> ww = weights_of(gw);
          const std::vector<double> ws = weights_of(gs);
          std::vector<Mat3> fw(gw.size());
          std::vector<Mat3> fs(gs.size());
          for (std::size_t i = 0; i < fw.size(); ++i) fw[i] = Mat3::Identity() + sw.gradient[i];
          for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = Mat3::Identity() + ss.gradient[i];
          const Mat3 r2 = best_fit_rotation_l2(fw, ww).rotation;
          const Mat3 r1 = best_fit_rotation_l2(fs, ws).rotation;
          for (auto& m : fw) m -= r2;
          for (auto& m : fs) m -= r1;
          Row& row = rows[k];
          row.grad_w = norm_of(sw.gradient, ww, p);
          row.grad_s = norm_of(ss.gradient, ws, p);
          row.dist_w = lp_norm_weighted(sw.dist, ww, p);
          row.dist_s = lp_norm_weighted(ss.dist, ws, p);
          row.fit_w = norm_of(fw, ww, p);
          row.fit_s = norm_of(fs, ws, p);
          row.vol_w = gw.volume();
          row.vol_s = gs.volume();
          row.gap = (r1 - r2).norm() * std::pow(row.vol_s, 1.0 / p);
        }
      },
      1);

  PassageReport rep;
  rep.h = h;
  rep.p = p;
  rep.patch_count = rows.size();
  rep.trivial = prof.kind() == ProfileKind::shell;
  double gw = 0.0, gs = 0.0, dw = 0.0;
  rep.c_shell_fit = kNaN;
  rep.c_domain_fit = kNaN;
  rep.c_rotation_gap = kNaN;
  rep.c_chain = kNaN;
  rep.volume_ratio_min = std::numeric_limits<double>::infinity();
  rep.volume_ratio_max = 0.0;
  for (const Row& r : rows) {
    gw += std::pow(r.grad_w, p);
    gs += std::pow(r.grad_s, p);
    dw += std::pow(r.dist_w, p);
    rep.c_shell_fit = nan_max(rep.c_shell_fit, ratio_or_nan(r.fit_s, r.dist_s));
    rep.c_domain_fit = nan_max(rep.c_domain_fit, ratio_or_nan(r.fit_w, r.dist_w));
    rep.c_rotation_gap = nan_max(rep.c_rotation_gap, ratio_or_nan(r.gap, r.dist_w));
    rep.c_chain = nan_max(rep.c_chain, ratio_or_nan(r.grad_w, r.dist_w + r.grad_s));
    const double vr = r.vol_w / r.vol_s;
    rep.volume_ratio_min = std::min(rep.volume_ratio_min, vr);
    rep.volume_ratio_max = std::max(rep.volume_ratio_max, vr);
  }
  rep.grad_domain = std::pow(gw, 1.0 / p);
  rep.grad_shell = std::pow(gs, 1.0 / p);
  rep.dist_domain = std::pow(dw, 1.0 / p);
  if (rep.grad_domain == 0.0) {
    rep.c_final = 0.0;
    rep.c_symmetric = 0.0;
  } else {
    rep.c_final = ratio_or_nan(std::max(0.0, rep.grad_domain - rep.grad_shell), rep.dist_domain);
    rep.c_symmetric = ratio_or_nan(rep.grad_domain, rep.dist_domain + rep.grad_shell);
  }
  return rep;
}

}  // namespace rigidity
