#pragma once

// 3x3 kernels: singular values, distance to SO(3), polar factors and
// weighted best-fit rotations. All norms are Frobenius.

#include "rigidity/geometry.hpp"

#include <span>
#include <vector>

namespace rigidity {

/// F = U diag(sigma) V^T with U, V orthogonal and sigma_1 >= sigma_2 >= sigma_3 >= 0.
struct Svd3 {
  Mat3 u;
  Vec3 sigma;
  Mat3 v;
};

/// Jacobi eigen-iteration on F^T F (seeded with the identity, swept until the
/// off-diagonal mass drops below tol relative to the trace) followed by a
/// Givens QR of F V, which recovers small singular values accurately.
Svd3 svd3(const Mat3& f, double tol = 1e-12);

/// min over R in SO(3) of |F - R|_F. Throws std::domain_error on non-finite input.
double dist_so3(const Mat3& f);

struct RotationFit {
  Mat3 rotation = Mat3::Identity();
  /// False when the minimiser is not unique (det F < 0 with sigma_2 == sigma_3,
  /// or a rank-deficient F); `rotation` is still a valid minimiser.
  bool unique = true;
};

/// R = U diag(1, 1, det(U V^T)) V^T.
RotationFit nearest_rotation(const Mat3& f);

/// argmin_R sum_i w_i |F_i - R|^2, the polar factor of the weighted mean.
RotationFit best_fit_rotation_l2(std::span<const Mat3> samples, std::span<const double> weights);

/// Rotation exp([omega]_x) by Rodrigues' formula.
Mat3 rotation_from_axis_angle(const Vec3& omega);

/// Unit quaternion (w, x, y, z) to rotation matrix.
Mat3 rotation_from_quaternion(double w, double x, double y, double z);

/// Skew matrix [omega]_x with [omega]_x v = omega x v.
Mat3 skew(const Vec3& omega);

bool is_rotation(const Mat3& r, double tol = 1e-10);

/// Deterministic quasi-uniform rotations: Halton points in bases (2, 3, 5)
/// mapped to the unit quaternion sphere by Shoemake's construction.
std::vector<Mat3> low_discrepancy_rotations(std::size_t count, std::size_t skip = 1);

}  // namespace rigidity
