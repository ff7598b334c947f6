#include "rigidity/errors.hpp"
#include "rigidity/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rigidity {

namespace {

struct AreaEstimate {
  double area = 0.0;
  double variance = 0.0;  // Monte Carlo only
};

/// Parameter box around (theta, z) guaranteed to contain B_radius(x) cap S.
/// Grows the box until the ball indicator vanishes on its boundary.
CoordRect bounding_box(const ParamSurface& surface, double theta, double z, double radius) {
  const CoordRect& dom = surface.domain();
  const SurfacePoint c = surface.evaluate(theta, z);
  double half_theta = 2.0 * radius / c.a_theta;
  double half_z = 2.0 * radius / c.a_z;
  for (int attempt = 0; attempt < 12; ++attempt) {
    CoordRect box{std::max(dom.theta_min, theta - half_theta),
                  std::min(dom.theta_max, theta + half_theta),
                  std::max(dom.z_min, z - half_z), std::min(dom.z_max, z + half_z)};
    bool inside_on_edge = false;
    constexpr int kEdge = 256;
    for (int k = 0; k <= kEdge && !inside_on_edge; ++k) {
      const double a = static_cast<double>(k) / kEdge;
      const double th = box.theta_min + a * box.theta_extent();
      const double zz = box.z_min + a * box.z_extent();
      const auto in = [&](double tq, double zq, bool clipped) {
        return !clipped && (surface.evaluate(tq, zq).position - c.position).norm() < radius;
      };
      inside_on_edge = in(th, box.z_min, box.z_min == dom.z_min) ||
                       in(th, box.z_max, box.z_max == dom.z_max) ||
                       in(box.theta_min, zz, box.theta_min == dom.theta_min) ||
                       in(box.theta_max, zz, box.theta_max == dom.theta_max);
    }
    if (!inside_on_edge) return box;
    half_theta *= 1.5;
    half_z *= 1.5;
  }
  throw std::runtime_error("doubling_ratio: could not bound the ball in parameter space");
}

AreaEstimate quadrature_area(const ParamSurface& surface, const Vec3& center, double radius,
                             const CoordRect& box, long cells_per_side) {
  const double dth = box.theta_extent() / cells_per_side;
  const double dz = box.z_extent() / cells_per_side;
  double area = 0.0;
  for (long i = 0; i < cells_per_side; ++i) {
    const double th = box.theta_min + (i + 0.5) * dth;
    double column = 0.0;
    for (long j = 0; j < cells_per_side; ++j) {
      const double zz = box.z_min + (j + 0.5) * dz;
      const SurfacePoint p = surface.evaluate(th, zz);
      if ((p.position - center).norm() < radius) column += p.a_theta * p.a_z;
    }
    area += column;
  }
  return {area * dth * dz, 0.0};
}

AreaEstimate monte_carlo_area(const ParamSurface& surface, const Vec3& center, double radius,
                              const CoordRect& box, long samples, std::mt19937_64& rng) {
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double box_area = box.theta_extent() * box.z_extent();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long k = 0; k < samples; ++k) {
    const double th = box.theta_min + uniform() * box.theta_extent();
    const double zz = box.z_min + uniform() * box.z_extent();
    const SurfacePoint p = surface.evaluate(th, zz);
    const double v = (p.position - center).norm() < radius ? p.a_theta * p.a_z * box_area : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) / n;
  return {mean, var};
}

}  // namespace

DoublingEstimate doubling_ratio(const ParamSurface& surface, double theta, double z,
                                double radius, long budget, DoublingMethod method,
                                unsigned long long seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("doubling_ratio: radius must be positive");
  if (budget < 16) throw std::invalid_argument("doubling_ratio: budget must be at least 16");
  const SurfacePoint c = surface.at(theta, z);

  const CoordRect inner_box = bounding_box(surface, theta, z, radius);
  const CoordRect outer_box = bounding_box(surface, theta, z, 2.0 * radius);

  DoublingEstimate est;
  if (method == DoublingMethod::quadrature) {
    const long n = std::max<long>(4, static_cast<long>(std::sqrt(static_cast<double>(budget))));
    const AreaEstimate inner = quadrature_area(surface, c.position, radius, inner_box, n);
    const AreaEstimate outer = quadrature_area(surface, c.position, 2.0 * radius, outer_box, n);
    const AreaEstimate inner_c = quadrature_area(surface, c.position, radius, inner_box, n / 2);
    const AreaEstimate outer_c =
        quadrature_area(surface, c.position, 2.0 * radius, outer_box, n / 2);
    est.inner_area = inner.area;
    est.outer_area = outer.area;
    est.ratio = inner.area / outer.area;
    // Compare each area with its half-resolution estimate. The ratio alone can
    // look converged because both boxes are discretised self-similarly.
    const auto rel = [](double fine, double coarse) {
      return fine > 0.0 ? std::abs(fine - coarse) / fine : 1.0;
    };
    est.std_error = est.ratio * std::hypot(rel(inner.area, inner_c.area),
                                           rel(outer.area, outer_c.area));
  } else {
    std::mt19937_64 rng(seed);
    const AreaEstimate inner = monte_carlo_area(surface, c.position, radius, inner_box, budget, rng);
    const AreaEstimate outer =
        monte_carlo_area(surface, c.position, 2.0 * radius, outer_box, budget, rng);
    est.inner_area = inner.area;
    est.outer_area = outer.area;
    est.ratio = inner.area / outer.area;
    const double rel = inner.variance / (inner.area * inner.area) +
                       outer.variance / (outer.area * outer.area);
    est.std_error = est.ratio * std::sqrt(rel);
  }
  if (!(est.outer_area > 0.0)) {
    throw std::runtime_error("doubling_ratio: empty ball; budget too small for this radius");
  }
  if (est.std_error > 0.01) {
    std::ostringstream msg;
    msg << "estimated error " << est.std_error << " exceeds 0.01; increase the sample budget";
    est.warning = msg.str();
  }
  return est;
}

}  // namespace rigidity
