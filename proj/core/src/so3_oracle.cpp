#include "rigidity/so3_oracle.hpp"

#include "rigidity/matrixops.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace rigidity::oracle {

BruteForceResult brute_force_dist_so3(const Mat3& f, std::span<const Mat3> rotations,
                                      bool refine) {
  BruteForceResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (const Mat3& r : rotations) {
    const double d = (f - r).squaredNorm();
    if (d < best.distance) {
      best.distance = d;
      best.rotation = r;
    }
  }
  if (refine) {
    double step = 0.1;
    while (step > 1e-9) {
      bool improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
          Vec3 w = Vec3::Zero();
          w[axis] = sign * step;
          const Mat3 candidate = best.rotation * rotation_from_axis_angle(w);
          const double d = (f - candidate).squaredNorm();
          if (d < best.distance) {
            best.distance = d;
            best.rotation = candidate;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

SelfTestReport dist_so3_selftest(std::size_t random_count, std::size_t rotation_count,
                                 double tolerance, unsigned long long seed) {
  SelfTestReport report;
  report.rotation_count = rotation_count;
  report.tolerance = tolerance;
  const std::vector<Mat3> rotations = low_discrepancy_rotations(rotation_count);

  const auto run = [&](const std::string& label, const Mat3& f) {
    SelfTestCase c;
    c.label = label;
    c.formula = dist_so3(f);
    c.brute_force = brute_force_dist_so3(f, rotations).distance;
    const double err = std::abs(c.formula - c.brute_force);
    c.passed = err <= tolerance;
    report.max_abs_error = std::max(report.max_abs_error, err);
    if (f.determinant() < 0.0) ++report.negative_determinant_cases;
    report.cases.push_back(c);
  };

  run("diag(2,1,1)", Eigen::Vector3d(2.0, 1.0, 1.0).asDiagonal().toDenseMatrix());
  run("diag(1,1,-1)", Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal().toDenseMatrix());

  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t i = 0; i < random_count; ++i) {
    Mat3 f;
    for (int k = 0; k < 9; ++k) f(k / 3, k % 3) = 2.0 * uniform() - 1.0;
    // Every third case is pushed near SO(3), the rest are generic.
    if (i % 3 == 0) {
      const Vec3 w(uniform() * 3.0 - 1.5, uniform() * 3.0 - 1.5, uniform() * 3.0 - 1.5);
      f = rotation_from_axis_angle(w) + 0.3 * f;
    }
    if (i % 4 == 1 && f.determinant() > 0.0) f.row(0) = -f.row(0);
    run("random#" + std::to_string(i), f);
  }

  report.passed = true;
  for (const auto& c : report.cases) report.passed = report.passed && c.passed;
  return report;
}

}  // namespace rigidity::oracle
