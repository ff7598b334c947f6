#pragma once

// Numerical trace of the partition argument: patches of in-plane size h^gamma,
// per-patch best-fit rotations, the Poincare step, the rotation lower bound
// and the passage from the constant-thickness shell to a thin domain.

#include "rigidity/fields.hpp"
#include "rigidity/inequality.hpp"
#include "rigidity/norms.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace rigidity {

struct PatchDecomposition {
  double gamma = 0.5;
  double h = 0.0;
  double target_size = 0.0;  // physical in-plane size aimed for (h^gamma or a multiple of h)
  int m_theta = 1;
  int m_z = 1;
  double cell_length_theta = 0.0;  // physical lengths measured along the patch centre lines
  double cell_length_z = 0.0;
  std::vector<CoordRect> patches;  // row-major in (theta, z)
  bool degenerate = false;         // single patch (gamma = 0)

  std::size_t count() const { return patches.size(); }
  nlohmann::json to_json() const;
};

/// m_theta x m_z congruent coordinate cells, m = floor(L / h^gamma) with L the
/// physical length of the patch centre line in each direction. gamma = 0
/// yields the whole patch, flagged degenerate. Throws DomainError if gamma is
/// outside [0, 1] and ResolutionError ("h too large") if m < 2 for gamma > 0.
PatchDecomposition partition(const ThinDomain& domain, double gamma);

/// Same construction with an explicit physical cell size (used for the
/// thin-domain passage, whose cells are of order h).
PatchDecomposition partition_by_size(const ThinDomain& domain, double size);

/// Per-patch quadrature; every direction needs at least 4 nodes.
struct PatchOptions {
  GridResolution resolution{4, 4, 4};
};

struct PatchTrace {
  std::size_t index = 0;
  CoordRect rect;
  Mat3 rotation = Mat3::Identity();  // best L^2 fit of I + grad v on the patch
  Vec3 offset = Vec3::Zero();        // patch mean of v + (I - R) x
  double volume = 0.0;

  double grad_norm = 0.0;        // |grad v|
  double residual = 0.0;         // |grad v + I - R|
  double dist_norm = 0.0;        // |dist(grad v + I, SO(3))|
  double field_norm = 0.0;       // |v|
  double identity_gap = 0.0;     // |I - R| over the patch
  double poincare_lhs = 0.0;     // |v + (I - R) x - b|
  double affine_residual = 0.0;  // |(I - R) x - b|

  // Empirical constants:
  //   c_fjm      = residual h^(1-gamma) / dist_norm
  //   c_poincare = poincare_lhs / (h^gamma residual)
  //   c_rotation = affine_residual / (h^gamma identity_gap)
  double c_fjm = 0.0;
  double c_poincare = 0.0;
  double c_rotation = 0.0;

  bool gradient_split_holds = false;  // |grad v| <= |I - R| + residual
  bool affine_split_holds = false;    // affine_residual <= |v| + poincare_lhs
  bool rotation_trivial = false;      // R = I: lower bound vacuous

  // Median radius (in units of h^gamma) of the patch measure projected onto
  // the plane orthogonal to the rotation axis, about the rotation centre; half
  // the measure lies outside the disc of this radius.
  double tau_star = 0.0;
  bool disc_bound_holds = false;  // affine_residual^p >= (tau h^gamma |I-R|_op)^p |S_i| / 2

  nlohmann::json to_json() const;
};

struct TraceSummary {
  double gamma = 0.5;
  double h = 0.0;
  double p = 2.0;
  std::vector<PatchTrace> patches;

  // Aggregates over the union of the patches.
  double grad_norm = 0.0;
  double field_norm = 0.0;
  double dist_norm = 0.0;
  // |grad v| / (|v| / h^gamma + |dist| / h^(1-gamma))
  double c_aggregate = 0.0;

  double c_fjm_max = 0.0;
  double c_poincare_max = 0.0;
  double c_rotation_min = 0.0;  // over non-trivial patches; NaN if none
  double tau_star_min = 0.0;

  nlohmann::json to_json(bool include_patches = true) const;
};

/// Evaluates the per-patch chain for the displacement v (deformation x + v).
/// Patches are processed in parallel and merged in index order. Throws
/// ResolutionError naming the patch if the per-patch grid has fewer than 4
/// nodes in some direction.
TraceSummary patch_trace(const FrameField& v, const PatchDecomposition& decomposition,
                         const ThinDomain& domain, double p, PatchOptions options = {});

struct RotationBoundCheck {
  double lhs = 0.0;       // |(I - R) x - b|
  double rhs = 0.0;       // scale |I - R|, scale = h^gamma
  double constant = 0.0;  // lhs / rhs, NaN when vacuous
  Vec3 offset = Vec3::Zero();
  bool vacuous = false;   // R = I
};

/// Both sides of the rotation lower bound on one patch grid. Without `b` the
/// worst case (patch mean of (I - R) x, the L^2 minimiser) is used.
RotationBoundCheck rotation_lower_bound_check(const Mat3& rotation, std::optional<Vec3> b,
                                              const QuadratureGrid& patch_grid, double p,
                                              double scale);

struct RotationAudit {
  std::size_t trials = 0;
  double min_constant = 0.0;
  double max_constant = 0.0;
  nlohmann::json to_json() const;
};

/// Random Haar rotations (seeded) checked on every patch with the worst-case b.
RotationAudit rotation_audit(const PatchDecomposition& decomposition, const ThinDomain& domain,
                             double p, std::size_t trials, unsigned long long seed,
                             PatchOptions options = {});

struct PassageOptions {
  double size_factor = 4.0;  // cell size = size_factor * h
  GridResolution resolution{4, 4, 4};
};

struct PassageReport {
  double h = 0.0;
  double p = 2.0;
  std::size_t patch_count = 0;
  bool trivial = false;  // constant profile: the thin domain is the shell

  double grad_domain = 0.0;  // |grad v|_{L^p(Omega^h)}
  double grad_shell = 0.0;   // |grad v|_{L^p(S^h)}
  double dist_domain = 0.0;  // |dist(grad v + I, SO(3))|_{L^p(Omega^h)}

  // Smallest C with |grad v|_Omega <= C |dist|_Omega + |grad v|_S, and the
  // constant of the symmetric form |grad v|_Omega <= C (|dist|_Omega + |grad v|_S).
  double c_final = 0.0;
  double c_symmetric = 0.0;

  // Per-patch chain constants (maxima over patches):
  //   shell_fit   = |grad v + I - R1|_s / |dist|_s
  //   domain_fit  = |grad v + I - R2|_w / |dist|_w
  //   rotation_gap = |R1 - R2|_s / |dist|_w
  //   chain       = |grad v|_w / (|dist|_w + |grad v|_s)
  double c_shell_fit = 0.0;
  double c_domain_fit = 0.0;
  double c_rotation_gap = 0.0;
  double c_chain = 0.0;
  double volume_ratio_min = 0.0;  // |w_i| / |s_i|
  double volume_ratio_max = 0.0;

  nlohmann::json to_json() const;
};

/// Traces the shell-to-thin-domain passage for the displacement v. The inner
/// shell is t in (-h/2, h/2) with h the profile's thickness parameter. Throws
/// AdmissibilityError if the shell is not contained in the thin domain.
PassageReport shell_to_domain_trace(const FrameField& v, const ThinDomain& domain, double p,
                                    PassageOptions options = {});

}  // namespace rigidity
