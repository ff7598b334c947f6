#pragma once

// Brute-force reference for the distance to SO(3). Uses only Frobenius norms
// of F - R over sampled rotations, never a matrix decomposition, so it can
// check dist_so3 independently.

#include "rigidity/geometry.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rigidity::oracle {

struct BruteForceResult {
  double distance = 0.0;
  Mat3 rotation = Mat3::Identity();
};

/// Minimum of |F - R|_F over `rotations`, then refined by a shrinking compass
/// search in the tangent space at the best sample.
BruteForceResult brute_force_dist_so3(const Mat3& f, std::span<const Mat3> rotations,
                                      bool refine = true);

struct SelfTestCase {
  std::string label;
  double formula = 0.0;
  double brute_force = 0.0;
  bool passed = false;
};

struct SelfTestReport {
  std::size_t rotation_count = 0;
  double tolerance = 0.0;
  double max_abs_error = 0.0;
  std::size_t negative_determinant_cases = 0;
  std::vector<SelfTestCase> cases;
  bool passed = false;
};

/// Compares dist_so3 with the brute-force reference on diag(2,1,1),
/// diag(1,1,-1) and `random_count` seeded random matrices (a share of them
/// with negative determinant).
SelfTestReport dist_so3_selftest(std::size_t random_count = 200,
                                 std::size_t rotation_count = 1u << 17, double tolerance = 1e-2,
                                 unsigned long long seed = 2024);

}  // namespace rigidity::oracle
