#include "rigidity/inequality.hpp"

#include "rigidity/matrixops.hpp"
#include "rigidity/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rigidity {

namespace {

nlohmann::json matrix_json(const Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

// Quantities below this (relative to vol^(2/p)) are treated as rounding noise.
constexpr double kDegenerateTol = 1e-20;

ReportStatus classify(double lhs, double rhs, double scale) {
  const double thr = kDegenerateTol * std::max(scale, 1e-300);
  if (rhs > thr) return ReportStatus::ok;
  return lhs > thr ? ReportStatus::impossible : ReportStatus::degenerate_exact;
}

}  // namespace

const char* to_string(ReportStatus status) {
  switch (status) {
    case ReportStatus::ok: return "ok";
    case ReportStatus::degenerate_exact: return "degenerate_exact";
    case ReportStatus::impossible: return "impossible";
  }
  return "unknown";
}

NodeSamples sample_field(const FrameField& field, const QuadratureGrid& grid) {
  const std::size_t n = grid.size();
  NodeSamples s;
  s.position.resize(n);
  s.value.resize(n);
  s.gradient.resize(n);
  s.dist.resize(n);
  s.strain.resize(n, 0.0);
  const ParamSurface& surface = grid.domain.surface();
  const bool displacement = field.kind() == FieldKind::displacement;
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const GridNode& q = grid.nodes[i];
      const SurfacePoint sp = surface.evaluate(q.theta, q.z);
      const Frame frame = frame_at(sp);
      const Mat3 e = frame.matrix();
      const FieldJet jet = field({q.t, q.theta, q.z});
      const Mat3 g = frame_gradient(jet, sp, q.t);
      s.position[i] = sp.position + q.t * sp.normal;
      s.value[i] = e * jet.value;
      s.gradient[i] = e * g * e.transpose();
      if (displacement) {
        s.dist[i] = dist_so3(Mat3::Identity() + g);
        s.strain[i] = (0.5 * (g + g.transpose())).norm();
      } else {
        s.dist[i] = dist_so3(g);
      }
    }
  });
  return s;
}

Vec3 grid_mean(const std::vector<Vec3>& values, const QuadratureGrid& grid) {
  if (values.size() != grid.size()) throw std::invalid_argument("grid_mean: size mismatch");
  std::vector<double> w(grid.size());
  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = grid.nodes[i].weight;
  const double total = pairwise_sum(w);
  Vec3 mean;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < grid.size(); ++i) c[i] = w[i] * values[i][k];
    mean[k] = pairwise_sum(c) / total;
  }
  return mean;
}

Mat3 best_fit_rotation(const NodeSamples& samples, const QuadratureGrid& grid) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = grid.nodes[i].weight;
  return best_fit_rotation_l2(samples.gradient, w).rotation;
}

InequalityReport interpolation_sides(const NodeSamples& samples, const Mat3& rotation,
                                     std::optional<Vec3> offset, const QuadratureGrid& grid,
                                     double p) {
  check_exponent(p);
  if (!is_rotation(rotation, 1e-10)) {
    throw std::invalid_argument("interpolation_sides: R is not a rotation (tolerance 1e-10)");
  }
  const std::size_t n = grid.size();
  if (samples.gradient.size() != n) {
    throw std::invalid_argument("interpolation_sides: samples do not match the grid");
  }
  std::vector<Mat3> grad_dev(n);
  std::vector<Vec3> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    grad_dev[i] = samples.gradient[i] - rotation;
    residual[i] = samples.value[i] - rotation * samples.position[i];
  }
  const Vec3 b = offset ? *offset : grid_mean(residual, grid);
  for (auto& r : residual) r -= b;

  InequalityReport rep;
  rep.p = p;
  rep.h = grid.domain.h();
  rep.rotation = rotation;
  rep.offset = b;
  rep.volume = grid.volume();
  const double a = lp_norm(std::span<const Vec3>(residual), grid, p);
  const double d = lp_norm(std::span<const double>(samples.dist), grid, p);
  const double g = lp_norm(std::span<const Mat3>(grad_dev), grid, p);
  rep.lhs = g * g;
  rep.rhs_product = a * d / rep.h;
  rep.rhs_field_sq = a * a;
  rep.rhs_dist_sq = d * d;
  rep.status = classify(rep.lhs, rep.rhs_sum(), std::pow(rep.volume, 2.0 / p));
  rep.ratio = rep.status == ReportStatus::ok ? rep.lhs / rep.rhs_sum()
                                             : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

InequalityReport interpolation_sides(const FrameField& y, const Mat3& rotation,
                                     std::optional<Vec3> offset, const QuadratureGrid& grid,
                                     double p) {
  check_exponent(p);
  if (y.kind() != FieldKind::deformation) {
    throw std::invalid_argument("interpolation_sides: expects a deformation, got displacement '" +
                                y.label() + "'");
  }
  return interpolation_sides(sample_field(y, grid), rotation, offset, grid, p);
}

nlohmann::json InequalityReport::to_json() const {
  return {{"lhs", lhs},
          {"rhs_product", rhs_product},
          {"rhs_field_sq", rhs_field_sq},
          {"rhs_dist_sq", rhs_dist_sq},
          {"rhs_sum", rhs_sum()},
          {"ratio", finite_or_null(ratio)},
          {"status", to_string(status)},
          {"p", p},
          {"h", h},
          {"volume", volume},
          {"rotation", matrix_json(rotation)},
          {"offset", {offset[0], offset[1], offset[2]}}};
}

KornReport korn_linear_sides(const FrameField& u, const QuadratureGrid& grid, double p) {
  check_exponent(p);
  if (u.kind() != FieldKind::displacement) {
    throw std::invalid_argument("korn_linear_sides: expects a displacement, got deformation '" +
                                u.label() + "'");
  }
  const NodeSamples s = sample_field(u, grid);
  KornReport rep;
  rep.p = p;
  rep.h = grid.domain.h();
  const double g = lp_norm(std::span<const Mat3>(s.gradient), grid, p);
  const double a = lp_norm(std::span<const Vec3>(s.value), grid, p);
  const double e = lp_norm(std::span<const double>(s.strain), grid, p);
  rep.grad_sq = g * g;
  rep.rhs_product = a * e / rep.h;
  rep.field_sq = a * a;
  rep.strain_sq = e * e;
  rep.status = classify(rep.grad_sq, rep.rhs_sum(), std::pow(grid.volume(), 2.0 / p));
  rep.ratio = rep.status == ReportStatus::ok ? rep.grad_sq / rep.rhs_sum()
                                             : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

nlohmann::json KornReport::to_json() const {
  return {{"grad_sq", grad_sq},         {"rhs_product", rhs_product}, {"field_sq", field_sq},
          {"strain_sq", strain_sq},     {"rhs_sum", rhs_sum()},       {"ratio", finite_or_null(ratio)},
          {"status", to_string(status)}, {"p", p},                    {"h", h}};
}

BalanceForm balance_form(double field_norm, double dist_norm, double h, double s) {
  if (!(h > 0.0)) throw std::invalid_argument("balance_form: h must be positive");
  if (!(s >= 0.0 && s <= 2.0)) throw std::invalid_argument("balance_form: s must lie in [0, 2]");
  BalanceForm b;
  b.s = s;
  b.h = h;
  b.field_norm = field_norm;
  b.dist_norm = dist_norm;
  b.term_field = field_norm * field_norm / std::pow(h, s);
  b.term_dist = dist_norm * dist_norm / std::pow(h, 2.0 - s);
  return b;
}

BalanceForm balance_form(const FrameField& v, const QuadratureGrid& grid, double p, double s) {
  check_exponent(p);
  if (v.kind() != FieldKind::displacement) {
    throw std::invalid_argument("balance_form: expects a displacement v with y = x + v");
  }
  const NodeSamples smp = sample_field(v, grid);
  const double a = lp_norm(std::span<const Vec3>(smp.value), grid, p);
  const double d = lp_norm(std::span<const double>(smp.dist), grid, p);
  return balance_form(a, d, grid.domain.h(), s);
}

double balanced_exponent(double field_norm, double dist_norm, double h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("balanced_exponent: need 0 < h < 1");
  if (field_norm <= 0.0) return 2.0;
  if (dist_norm <= 0.0) return 0.0;
  // h^s = h a / b  <=>  s = 1 + log(a / b) / log(h)
  const double s = 1.0 + std::log(field_norm / dist_norm) / std::log(h);
  return std::clamp(s, 0.0, 2.0);
}

EquivalenceRecord equivalence_check(double a, double b, double h) {
  if (!(a >= 0.0 && b >= 0.0)) throw std::invalid_argument("equivalence_check: need a, b >= 0");
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("equivalence_check: need 0 < h < 1");
  EquivalenceRecord r;
  r.a = a;
  r.b = b;
  r.h = h;
  r.e1 = a * b / h + a * a + b * b;
  // f(s) = a^2 h^-s + b^2 h^(s-2) is convex in s; its stationary point is the
  // balanced exponent, so the constrained minimum sits at the clamp.
  r.s_star = balanced_exponent(a, b, h);
  r.e2_star = a * a / std::pow(h, r.s_star) + b * b / std::pow(h, 2.0 - r.s_star);
  r.ratio_e2_over_e1 = r.e1 > 0.0 ? r.e2_star / r.e1 : 1.0;
  r.ratio_e1_over_e2 = r.e2_star > 0.0 ? r.e1 / r.e2_star : 1.0;
  const double slack = 1e-12 * (r.e1 + r.e2_star);
  r.upper_holds = r.e2_star <= 3.0 * r.e1 + slack;
  r.lower_holds = r.e1 <= 2.0 * r.e2_star + a * a + b * b + slack;
  r.amgm_holds = r.e2_star + slack >= 2.0 * a * b / h;
  return r;
}

}  // namespace rigidity
