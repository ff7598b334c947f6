#include "rigidity/matrixops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rigidity {

namespace {

/// Cyclic Jacobi on a symmetric 3x3 matrix. On return `a` is (nearly) diagonal
/// and `v` holds the accumulated rotations, so that a_in = v a_out v^T.
void jacobi_eigen(Mat3& a, Mat3& v, double tol) {
  v.setIdentity();
  const double scale = std::max(a.trace(), a.cwiseAbs().maxCoeff());
  if (scale == 0.0) return;
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (std::sqrt(off) <= tol * scale * 1e-4) return;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // a <- J^T a J with J the Givens rotation in the (p, q) plane.
        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

/// Givens rotation (c, s) zeroing b in (a, b).
std::pair<double, double> givens(double a, double b) {
  const double r = std::hypot(a, b);
  if (r == 0.0) return {1.0, 0.0};
  return {a / r, b / r};
}

}  // namespace

Svd3 svd3(const Mat3& f, double tol) {
  Mat3 ata = f.transpose() * f;
  Mat3 v;
  jacobi_eigen(ata, v, tol);

  // Sort eigenvalues descending, permuting V accordingly.
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&ata](int i, int j) { return ata(i, i) > ata(j, j); });
  Mat3 vs;
  for (int k = 0; k < 3; ++k) vs.col(k) = v.col(order[k]);
  if (vs.determinant() < 0.0) vs.col(2) = -vs.col(2);

  // QR of B = F V by Givens rotations; B's columns are orthogonal, so the
  // triangular factor is diagonal up to rounding.
  Mat3 b = f * vs;
  Mat3 q = Mat3::Identity();
  const auto apply = [&](int r1, int r2, int col) {
    const auto [c, s] = givens(b(r1, col), b(r2, col));
    for (int k = 0; k < 3; ++k) {
      const double x = b(r1, k);
      const double y = b(r2, k);
      b(r1, k) = c * x + s * y;
      b(r2, k) = -s * x + c * y;
    }
    for (int k = 0; k < 3; ++k) {
      const double x = q(k, r1);
      const double y = q(k, r2);
      q(k, r1) = c * x + s * y;
      q(k, r2) = -s * x + c * y;
    }
  };
  apply(0, 1, 0);
  apply(0, 2, 0);
  apply(1, 2, 1);

  Svd3 out;
  out.u = q;
  out.v = vs;
  for (int k = 0; k < 3; ++k) {
    out.sigma[k] = b(k, k);
    if (out.sigma[k] < 0.0) {
      out.sigma[k] = -out.sigma[k];
      out.u.col(k) = -out.u.col(k);
    }
  }
  // Rounding can leave the diagonal slightly out of order.
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2 - i; ++j) {
      if (out.sigma[j] < out.sigma[j + 1]) {
        std::swap(out.sigma[j], out.sigma[j + 1]);
        out.u.col(j).swap(out.u.col(j + 1));
        out.v.col(j).swap(out.v.col(j + 1));
      }
    }
  }
  return out;
}

double dist_so3(const Mat3& f) {
  if (!f.allFinite()) throw std::domain_error("dist_so3: matrix has non-finite entries");
  const Svd3 s = svd3(f);
  const double det = f.determinant();
  const double s3 = det >= 0.0 ? s.sigma[2] - 1.0 : s.sigma[2] + 1.0;
  const double d1 = s.sigma[0] - 1.0;
  const double d2 = s.sigma[1] - 1.0;
  return std::sqrt(d1 * d1 + d2 * d2 + s3 * s3);
}

RotationFit nearest_rotation(const Mat3& f) {
  if (!f.allFinite()) throw std::domain_error("nearest_rotation: non-finite entries");
  const Svd3 s = svd3(f);
  const double d = (s.u * s.v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  RotationFit fit;
  fit.rotation = s.u * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() * s.v.transpose();
  const double scale = std::max(1.0, s.sigma[0]);
  const double gap = s.sigma[1] - s.sigma[2];
  if (d < 0.0 && gap <= 1e-12 * scale) fit.unique = false;
  if (s.sigma[1] <= 1e-14 * scale) fit.unique = false;
  return fit;
}

RotationFit best_fit_rotation_l2(std::span<const Mat3> samples, std::span<const double> weights) {
  if (samples.size() != weights.size()) {
    throw std::invalid_argument("best_fit_rotation_l2: samples and weights differ in length");
  }
  Mat3 mean = Mat3::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mean += weights[i] * samples[i];
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("best_fit_rotation_l2: total weight must be > 0");
  return nearest_rotation(mean / total);
}

Mat3 skew(const Vec3& w) {
  Mat3 k;
  k << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return k;
}

Mat3 rotation_from_axis_angle(const Vec3& omega) {
  const double angle = omega.norm();
  const Mat3 k = skew(omega);
  if (angle < 1e-8) return Mat3::Identity() + k + 0.5 * k * k;
  return Mat3::Identity() + (std::sin(angle) / angle) * k +
         ((1.0 - std::cos(angle)) / (angle * angle)) * k * k;
}

Mat3 rotation_from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

namespace {

double radical_inverse(std::size_t index, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double result = 0.0;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return result;
}

}  // namespace

std::vector<Mat3> low_discrepancy_rotations(std::size_t count, std::size_t skip) {
  std::vector<Mat3> out;
  out.reserve(count);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = i + skip;
    const double u1 = radical_inverse(k, 2);
    const double u2 = radical_inverse(k, 3);
    const double u3 = radical_inverse(k, 5);
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    out.push_back(rotation_from_quaternion(a * std::sin(two_pi * u2), a * std::cos(two_pi * u2),
                                           b * std::sin(two_pi * u3), b * std::cos(two_pi * u3)));
  }
  return out;
}

}  // namespace rigidity
