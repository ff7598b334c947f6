#pragma once

// Vector fields given by their components (y_t, y_theta, y_z) in the local
// frame of a thin-domain chart, the frame gradient built from them, and an
// independent finite-difference Euclidean oracle for that gradient.

#include "rigidity/geometry.hpp"

#include <functional>
#include <memory>
#include <string>

namespace rigidity {

/// Chart coordinates of a point of a thin domain.
struct ChartPoint {
  double t = 0.0;
  double theta = 0.0;
  double z = 0.0;
};

/// Field value and first partials at one point:
/// partials(k, j) = d y_k / d q_j with components k and coordinates q both
/// ordered (t, theta, z).
struct FieldJet {
  Vec3 value = Vec3::Zero();
  Mat3 partials = Mat3::Zero();
};

/// A deformation's gradient is compared against rotations, a displacement's
/// against zero.
enum class FieldKind { deformation, displacement };

enum class PartialsSource { analytic, finite_difference };

class FrameField {
 public:
  using Evaluator = std::function<FieldJet(const ChartPoint&)>;

  FrameField(FieldKind kind, Evaluator evaluator, std::string label,
             PartialsSource source = PartialsSource::analytic, double fd_step = 0.0);

  FieldJet operator()(const ChartPoint& q) const { return (*evaluator_)(q); }
  Vec3 value(const ChartPoint& q) const { return (*this)(q).value; }

  FieldKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  PartialsSource partials_source() const { return source_; }
  double fd_step() const { return fd_step_; }

 private:
  FieldKind kind_;
  std::shared_ptr<const Evaluator> evaluator_;
  std::string label_;
  PartialsSource source_;
  double fd_step_;
};

/// Chart box used for one-sided differences at its faces.
struct ChartBox {
  double t_min = -1.0;
  double t_max = 1.0;
  CoordRect rect;
};

/// Wraps a values-only callable; partials come from central differences with
/// the given step, switching to one-sided differences at faces of `box`.
FrameField field_from_values(FieldKind kind, std::function<Vec3(const ChartPoint&)> values,
                             ChartBox box, std::string label, double step = 1e-5);

/// Field whose Euclidean form Y(X) and Jacobian DY(X) are known; components
/// and partials are obtained by projecting onto the moving frame.
FrameField euclidean_map_field(SurfacePtr surface, FieldKind kind,
                               std::function<Vec3(const Vec3&)> map,
                               std::function<Mat3(const Vec3&)> jacobian, std::string label);

/// Identity deformation x -> x.
FrameField identity_field(SurfacePtr surface);

/// Rigid deformation x -> q x + c.
FrameField rigid_field(SurfacePtr surface, const Mat3& q, const Vec3& c);

/// Rigid deformation from a seeded random rotation and translation.
FrameField rigid_field_from_seed(SurfacePtr surface, unsigned long long seed);

/// Affine displacement x -> a x + c (a skew gives an infinitesimal rotation).
FrameField affine_displacement(SurfacePtr surface, const Mat3& a, const Vec3& c,
                               std::string label = "affine");

/// Identity deformation as a displacement field u(x) = x.
FrameField identity_displacement(SurfacePtr surface);

/// x -> x + c2 (x.x) a + c3 x_0 x_1 x_2 b: a cubic polynomial deformation used as
/// an analytic test field.
FrameField polynomial_test_field(SurfacePtr surface, double amplitude = 0.2);

/// x + eps u for a displacement u.
FrameField identity_plus(SurfacePtr surface, double eps, const FrameField& displacement);

/// a * f (kind preserved).
FrameField scaled(const FrameField& f, double a);

/// Sum of two fields with the kind of the first.
FrameField sum(const FrameField& a, const FrameField& b);

/// Frame gradient assembled from a jet and the surface data at (theta, z):
/// column j is the derivative along the unit direction e_j, row k the
/// component along e_k. Throws ChartDegeneracyError if 1 + t kappa <= 0.
Mat3 frame_gradient(const FieldJet& jet, const SurfacePoint& point, double t);

Mat3 frame_gradient(const FrameField& field, const ParamSurface& surface, double t,
                    double theta, double z);

/// Symmetric part of the frame gradient of a displacement.
Mat3 linear_strain(const FrameField& field, const ParamSurface& surface, double t, double theta,
                   double z);

/// Independent check of frame_gradient: central differences of the chart map
/// and of the Euclidean field Y = sum_k y_k e_k in (t, theta, z), combined as
/// DY = J_Y J_X^{-1} and expressed in the frame at the point.
Mat3 euclidean_gradient_oracle(const FrameField& field, const ThinDomain& domain, double t,
                               double theta, double z, double step);

/// Euclidean vector sum_k y_k e_k for frame components y.
Vec3 to_euclidean(const Vec3& components, const Frame& frame);

/// Displacement with components given by truncated trigonometric series in
/// (t, theta, z) whose frequencies, phases and coefficients are drawn from
/// `seed`. Partials analytic.
FrameField random_smooth_field(unsigned long long seed, double amplitude, int modes,
                               SurfacePtr surface);

/// Separable compactly supported profile W(xi, z) = b(xi / xi_half) b((z - z_c) / z_half)
/// with b(s) = (1 - s^2)^4 on [-1, 1].
struct AnsatzProfile {
  double xi_half = 1.0;
  double z_center = 0.0;
  double z_half = 0.4;
  double theta_center = 0.0;
  double epsilon = 1e-2;

  /// Default profile centred on the patch with z support 80% of the half extent.
  static AnsatzProfile centered_on(const CoordRect& rect);
  /// Zero profile W = 0 (degenerate; used as a trivial case).
  static AnsatzProfile zero();

  bool is_zero() const { return zero_; }

  struct Jet {
    double w = 0.0, w_xi = 0.0, w_xixi = 0.0, w_z = 0.0, w_xiz = 0.0, w_zz = 0.0;
  };
  Jet evaluate(double xi, double z) const;

  nlohmann::json parameters() const;

 private:
  bool zero_ = false;
};

/// The sharp displacement
///   u_t = W(xi, z), u_theta = -t W_xi / (A_theta sqrt h), u_z = -t W_z / A_z,
/// xi = (theta - theta_c) / sqrt h, with analytic partials (including the
/// dependence of A_theta, A_z on theta and z). Throws DomainError when the
/// scaled support leaves the patch.
FrameField ansatz_field(const AnsatzProfile& profile, SurfacePtr surface, double h);

}  // namespace rigidity
