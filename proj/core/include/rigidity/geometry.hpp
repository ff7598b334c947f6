#pragma once

// Mid-surface patches in principal coordinates (theta, z), thickness
// profiles and the thin domains built from them.
//
// Conventions used throughout the library:
//  * the chart of a thin domain is X(t, theta, z) = r(theta, z) + t n(theta, z)
//    with n the outward unit normal;
//  * principal curvatures are positive for a sphere, i.e. the normal
//    satisfies dn/dtheta = kappa_theta * dr/dtheta and dn/dz = kappa_z * dr/dz,
//    so the scale factors of the chart are A (1 + t kappa);
//  * the local frame is ordered (e_t, e_theta, e_z) = (n, r_theta/A_theta, r_z/A_z).

#include <Eigen/Core>
#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace rigidity {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Closed coordinate rectangle [theta_min, theta_max] x [z_min, z_max].
struct CoordRect {
  double theta_min = 0.0;
  double theta_max = 1.0;
  double z_min = 0.0;
  double z_max = 1.0;

  double theta_extent() const { return theta_max - theta_min; }
  double z_extent() const { return z_max - z_min; }
  double theta_center() const { return 0.5 * (theta_min + theta_max); }
  double z_center() const { return 0.5 * (z_min + z_max); }
  bool contains(double theta, double z, double tol = 0.0) const;
  bool contains(const CoordRect& other, double tol = 1e-12) const;
};

nlohmann::json to_json(const CoordRect& rect);

/// Differential data of a surface at one (theta, z).
struct SurfacePoint {
  Vec3 position;
  Vec3 d_theta;  // dr/dtheta
  Vec3 d_z;      // dr/dz
  Vec3 normal;   // outward unit normal
  double a_theta = 1.0;
  double a_z = 1.0;
  double da_theta_dtheta = 0.0;
  double da_theta_dz = 0.0;  // A_{theta,z}
  double da_z_dtheta = 0.0;  // A_{z,theta}
  double da_z_dz = 0.0;
  double kappa_theta = 0.0;
  double kappa_z = 0.0;
};

/// Orthonormal triple (e_t, e_theta, e_z).
struct Frame {
  Vec3 e_t;
  Vec3 e_theta;
  Vec3 e_z;

  /// Columns are e_t, e_theta, e_z. Maps frame components to Euclidean ones.
  Mat3 matrix() const;
};

/// Derivatives of the frame vectors along the two surface coordinates.
/// The frame does not depend on t.
struct FrameDerivatives {
  Frame d_theta;
  Frame d_z;
};

class ParamSurface {
 public:
  explicit ParamSurface(CoordRect domain) : domain_(domain) {}
  virtual ~ParamSurface() = default;

  ParamSurface(const ParamSurface&) = delete;
  ParamSurface& operator=(const ParamSurface&) = delete;

  virtual std::string_view name() const = 0;

  /// Differential data without a domain check.
  virtual SurfacePoint evaluate(double theta, double z) const = 0;

  /// Surface parameters for report echoes, including the patch.
  virtual nlohmann::json parameters() const = 0;

  /// Differential data, throwing DomainError outside the patch.
  SurfacePoint at(double theta, double z) const;

  const CoordRect& domain() const { return domain_; }

 private:
  CoordRect domain_;
};

using SurfacePtr = std::shared_ptr<const ParamSurface>;

/// Flat chart r(theta, z) = (theta, z, 0).
SurfacePtr make_plate(CoordRect domain = {0.0, 1.0, 0.0, 1.0});

/// r = radius (sin z cos theta, sin z sin theta, cos z), z the colatitude.
SurfacePtr make_sphere(double radius = 1.0,
                       CoordRect domain = {-0.5, 0.5, 1.0707963267948966, 2.0707963267948966});

/// r = (radius cos theta, radius sin theta, -z).
SurfacePtr make_cylinder(double radius = 1.0, CoordRect domain = {-0.5, 0.5, -0.5, 0.5});

/// Catenoid patch r = (c cosh(z/c) cos theta, c cosh(z/c) sin theta, -z);
/// K = -1 / (c^2 cosh^4(z/c)) < 0 everywhere.
SurfacePtr make_pseudosphere(double neck = 1.0, CoordRect domain = {-0.5, 0.5, -0.3, 0.3});

/// Same surface with the roles of theta and z exchanged.
SurfacePtr swap_chart(SurfacePtr surface);

/// Numeric surface parameters accepted by make_surface.
struct SurfaceSpec {
  std::string name = "sphere";
  double radius = 1.0;  // sphere/cylinder radius, catenoid neck
  std::optional<CoordRect> domain;
};

/// Builds one of plate, cylinder, sphere, pseudospherical by name.
SurfacePtr make_surface(const SurfaceSpec& spec);

Frame frame_at(const SurfacePoint& point);
Frame frame_at(const ParamSurface& surface, double theta, double z);

/// Frame derivatives in principal coordinates, e.g.
/// d e_theta / d theta = -kappa_theta A_theta e_t - (A_{theta,z} / A_z) e_z.
FrameDerivatives frame_derivatives(const SurfacePoint& point);

double gaussian_curvature(const ParamSurface& surface, double theta, double z);

/// max |kappa| over a sample grid of the patch.
double max_abs_curvature(const ParamSurface& surface, int samples_per_side = 65);

/// Chart nondegeneracy bound h0 = 0.5 / max |kappa| (infinite when flat).
double chart_limit_h0(const ParamSurface& surface);

enum class ProfileKind { shell, bump };

/// Thickness functions g1, g2 around the mid-surface. The shell profile
/// g1 = g2 = h/2 is the constant-thickness neighbourhood S^h; the bump profile
/// g1 = h (1 + a s1), g2 = h (1 + a s2) with smooth s1, s2 in [0, 1] on the
/// patch exercises genuinely variable thickness.
class ThicknessProfile {
 public:
  static ThicknessProfile shell(double h);
  static ThicknessProfile bump(double h, const CoordRect& patch, double amplitude = 0.3,
                               double c2 = 6.0);

  ProfileKind kind() const { return kind_; }
  double h() const { return h_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  /// Lower constant in lower_factor * h <= g: 1 for variable-thickness profiles,
  /// 1/2 for the shell S^h, whose half-thickness is h/2.
  double lower_factor() const { return lower_factor_; }
  double amplitude() const { return amplitude_; }

  double g1(double theta, double z) const;
  double g2(double theta, double z) const;
  /// Coordinate partials (d/dtheta, d/dz) of g1 and g2.
  Eigen::Vector2d grad_g1(double theta, double z) const;
  Eigen::Vector2d grad_g2(double theta, double z) const;

  /// Same profile shape at another thickness parameter.
  ThicknessProfile with_h(double h) const;

  nlohmann::json parameters() const;

 private:
  ThicknessProfile() = default;
  double s1(double theta, double z) const;
  double s2(double theta, double z) const;

  ProfileKind kind_ = ProfileKind::shell;
  double h_ = 0.0;
  double c1_ = 0.5;
  double c2_ = 0.0;
  double lower_factor_ = 0.5;
  double amplitude_ = 0.0;
  CoordRect patch_{};
};

/// Surface plus thickness profile. Construction validates the profile bounds
/// and chart nondegeneracy on a sample grid; instances are immutable.
class ThinDomain {
 public:
  ThinDomain(SurfacePtr surface, ThicknessProfile profile, int samples_per_side = 33);

  const ParamSurface& surface() const { return *surface_; }
  const SurfacePtr& surface_ptr() const { return surface_; }
  const ThicknessProfile& profile() const { return profile_; }
  double h() const { return profile_.h(); }

  /// Same surface and profile restricted to a sub-rectangle of the patch.
  /// Validation is skipped; the parent already passed it.
  const CoordRect& rect() const { return rect_; }
  ThinDomain restricted(const CoordRect& rect) const;

  /// Same surface, replacing the thickness profile.
  ThinDomain with_profile(ThicknessProfile profile) const;

  nlohmann::json parameters() const;

 private:
  struct Unchecked {};
  ThinDomain(SurfacePtr surface, ThicknessProfile profile, CoordRect rect, Unchecked);

  SurfacePtr surface_;
  ThicknessProfile profile_;
  CoordRect rect_;
};

/// X(t, theta, z) = r(theta, z) + t n(theta, z).
Vec3 embed(const ThinDomain& domain, double t, double theta, double z);

/// A_theta A_z (1 + t kappa_theta)(1 + t kappa_z); throws ChartDegeneracyError
/// if nonpositive.
double volume_jacobian(const ThinDomain& domain, double t, double theta, double z);
double volume_jacobian(const SurfacePoint& point, double t);

enum class DoublingMethod { quadrature, monte_carlo };

struct DoublingEstimate {
  double ratio = 0.0;
  double std_error = 0.0;
  double inner_area = 0.0;
  double outer_area = 0.0;
  std::string warning;  // empty unless the budget looked insufficient
};

/// Estimates H^2(B_r(x) cap S) / H^2(B_2r(x) cap S) for x = r(theta, z).
/// `budget` is the number of indicator evaluations per ball.
DoublingEstimate doubling_ratio(const ParamSurface& surface, double theta, double z,
                                double radius, long budget = 250000,
                                DoublingMethod method = DoublingMethod::quadrature,
                                unsigned long long seed = 1);

}  // namespace rigidity
