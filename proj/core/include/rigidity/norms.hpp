#pragma once

// Tensor-product Gauss-Legendre grids over thin domains and L^p norms of
// scalar, vector and matrix fields sampled on them.

#include "rigidity/fields.hpp"
#include "rigidity/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rigidity {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// Composite Gauss-Legendre rule on [a, b] with `count` nodes split into
/// equal panels of at most `panel_order` nodes; count is rounded up to a
/// multiple of the panel order when it exceeds it.
QuadratureRule composite_gauss_legendre(double a, double b, int count, int panel_order = 8);

struct GridResolution {
  int n_t = 8;
  int n_theta = 64;
  int n_z = 64;
};

struct GridNode {
  double t = 0.0;
  double theta = 0.0;
  double z = 0.0;
  double weight = 0.0;  // includes the volume Jacobian
};

/// Nodes are stored column by column: n_t consecutive nodes share (theta, z).
struct QuadratureGrid {
  ThinDomain domain;
  GridResolution resolution;
  std::vector<GridNode> nodes;

  double volume() const;
  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre nodes in each coordinate over domain.rect(); per column
/// the t-interval is (-g1, g2). Throws ChartDegeneracyError naming the node
/// if 1 + t kappa <= 0 anywhere.
QuadratureGrid build_grid(const ThinDomain& domain, GridResolution resolution,
                          int panel_order = 8);

/// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> values);

/// (sum_i w_i |v_i|^p)^(1/p); p must satisfy 1 < p < infinity.
double lp_norm(std::span<const double> values, const QuadratureGrid& grid, double p);
double lp_norm(std::span<const Vec3> values, const QuadratureGrid& grid, double p);
double lp_norm(std::span<const Mat3> values, const QuadratureGrid& grid, double p);

/// Same, restricted to the weights of an arbitrary node subset.
double lp_norm_weighted(std::span<const double> magnitudes, std::span<const double> weights,
                        double p);

void check_exponent(double p);

/// Writes `t,theta,z,v1,v2,v3` rows of the field components at every node.
void write_samples_csv(std::ostream& out, const QuadratureGrid& grid, const FrameField& field);

/// Field sampled on a rectilinear (t, theta, z) lattice, read from the CSV
/// schema `t,theta,z,v1,...,vk` (k >= 3; the first three value columns are
/// the frame components). Rows may come in any order but must cover the
/// full lattice.
class SampledField {
 public:
  static SampledField read_csv(std::istream& in);

  /// Local cubic Lagrange interpolation per axis (linear when an axis has
  /// fewer than four samples). Throws DomainError outside the lattice.
  Vec3 interpolate(const ChartPoint& q) const;

  const std::vector<double>& t_axis() const { return t_; }
  const std::vector<double>& theta_axis() const { return theta_; }
  const std::vector<double>& z_axis() const { return z_; }

  /// FrameField with finite-difference partials (step 1e-5, one-sided at the
  /// lattice faces).
  FrameField to_field(FieldKind kind, std::string label) const;

 private:
  std::vector<double> t_, theta_, z_;
  std::vector<Vec3> values_;  // index (i_t * n_theta + i_theta) * n_z + i_z
};

}  // namespace rigidity
