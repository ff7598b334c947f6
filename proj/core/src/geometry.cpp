#include "rigidity/geometry.hpp"

#include "rigidity/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

namespace rigidity {

bool CoordRect::contains(double theta, double z, double tol) const {
  return theta >= theta_min - tol && theta <= theta_max + tol && z >= z_min - tol &&
         z <= z_max + tol;
}

bool CoordRect::contains(const CoordRect& other, double tol) const {
  return other.theta_min >= theta_min - tol && other.theta_max <= theta_max + tol &&
         other.z_min >= z_min - tol && other.z_max <= z_max + tol;
}

nlohmann::json to_json(const CoordRect& rect) {
  return {{"theta_min", rect.theta_min},
          {"theta_max", rect.theta_max},
          {"z_min", rect.z_min},
          {"z_max", rect.z_max}};
}

SurfacePoint ParamSurface::at(double theta, double z) const {
  if (!domain_.contains(theta, z, 1e-12)) {
    std::ostringstream msg;
    msg << name() << ": ";
    if (theta < domain_.theta_min || theta > domain_.theta_max) {
      msg << "theta = " << theta << " outside [" << domain_.theta_min << ", "
          << domain_.theta_max << "]";
    } else {
      msg << "z = " << z << " outside [" << domain_.z_min << ", " << domain_.z_max << "]";
    }
    throw DomainError(msg.str());
  }
  return evaluate(theta, z);
}

Mat3 Frame::matrix() const {
  Mat3 m;
  m.col(0) = e_t;
  m.col(1) = e_theta;
  m.col(2) = e_z;
  return m;
}

namespace {

void check_rect(const CoordRect& rect) {
  if (!(rect.theta_max > rect.theta_min) || !(rect.z_max > rect.z_min)) {
    throw std::invalid_argument("surface patch must have positive extent in theta and z");
  }
}

class Plate final : public ParamSurface {
 public:
  explicit Plate(CoordRect domain) : ParamSurface(domain) { check_rect(domain); }

  std::string_view name() const override { return "plate"; }

  SurfacePoint evaluate(double theta, double z) const override {
    SurfacePoint p;
    p.position = Vec3(theta, z, 0.0);
    p.d_theta = Vec3::UnitX();
    p.d_z = Vec3::UnitY();
    p.normal = Vec3::UnitZ();
    return p;
  }

  nlohmann::json parameters() const override {
    return {{"name", "plate"}, {"chart", "r = (theta, z, 0)"}, {"domain", to_json(domain())}};
  }
};

/// Profile curve (rho(z), zeta(z)) of a surface of revolution about the
/// Cartesian z-axis, r = (rho cos theta, rho sin theta, zeta). The normal
/// (-zeta' cos theta, -zeta' sin theta, rho') / A_z points away from the axis
/// whenever zeta' < 0, which all built-in profiles satisfy.
struct RevolutionProfile {
  std::function<double(double)> rho, drho, ddrho;
  std::function<double(double)> zeta, dzeta, ddzeta;
};

class RevolutionSurface final : public ParamSurface {
 public:
  RevolutionSurface(std::string name, CoordRect domain, RevolutionProfile profile,
                    nlohmann::json params)
      : ParamSurface(domain),
        name_(std::move(name)),
        profile_(std::move(profile)),
        params_(std::move(params)) {
    check_rect(domain);
  }

  std::string_view name() const override { return name_; }

  SurfacePoint evaluate(double theta, double z) const override {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double rho = profile_.rho(z);
    const double drho = profile_.drho(z);
    const double ddrho = profile_.ddrho(z);
    const double dzeta = profile_.dzeta(z);
    const double ddzeta = profile_.ddzeta(z);

    SurfacePoint p;
    p.position = Vec3(rho * c, rho * s, profile_.zeta(z));
    p.d_theta = Vec3(-rho * s, rho * c, 0.0);
    p.d_z = Vec3(drho * c, drho * s, dzeta);
    p.a_theta = std::abs(rho);
    p.a_z = std::hypot(drho, dzeta);
    p.normal = Vec3(-dzeta * c, -dzeta * s, drho) / p.a_z;
    p.da_theta_dtheta = 0.0;
    p.da_theta_dz = rho >= 0.0 ? drho : -drho;
    p.da_z_dtheta = 0.0;
    p.da_z_dz = (drho * ddrho + dzeta * ddzeta) / p.a_z;
    p.kappa_theta = -dzeta / (rho * p.a_z);
    p.kappa_z = (ddrho * dzeta - ddzeta * drho) / (p.a_z * p.a_z * p.a_z);
    return p;
  }

  nlohmann::json parameters() const override {
    nlohmann::json j = params_;
    j["name"] = name_;
    j["domain"] = to_json(domain());
    return j;
  }

 private:
  std::string name_;
  RevolutionProfile profile_;
  nlohmann::json params_;
};

class SwappedChart final : public ParamSurface {
 public:
  explicit SwappedChart(SurfacePtr inner)
      : ParamSurface(CoordRect{inner->domain().z_min, inner->domain().z_max,
                               inner->domain().theta_min, inner->domain().theta_max}),
        inner_(std::move(inner)) {}

  std::string_view name() const override { return inner_->name(); }

  SurfacePoint evaluate(double theta, double z) const override {
    const SurfacePoint q = inner_->evaluate(z, theta);
    SurfacePoint p;
    p.position = q.position;
    p.d_theta = q.d_z;
    p.d_z = q.d_theta;
    p.normal = q.normal;
    p.a_theta = q.a_z;
    p.a_z = q.a_theta;
    p.da_theta_dtheta = q.da_z_dz;
    p.da_theta_dz = q.da_z_dtheta;
    p.da_z_dtheta = q.da_theta_dz;
    p.da_z_dz = q.da_theta_dtheta;
    p.kappa_theta = q.kappa_z;
    p.kappa_z = q.kappa_theta;
    return p;
  }

  nlohmann::json parameters() const override {
    nlohmann::json j = inner_->parameters();
    j["chart_swapped"] = true;
    j["domain"] = to_json(domain());
    return j;
  }

 private:
  SurfacePtr inner_;
};

}  // namespace

SurfacePtr make_plate(CoordRect domain) { return std::make_shared<Plate>(domain); }

SurfacePtr make_sphere(double radius, CoordRect domain) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (domain.z_min < 0.0 || domain.z_max > std::numbers::pi) {
    throw std::invalid_argument("sphere colatitude range must lie in [0, pi]");
  }
  RevolutionProfile prof{
      [radius](double z) { return radius * std::sin(z); },
      [radius](double z) { return radius * std::cos(z); },
      [radius](double z) { return -radius * std::sin(z); },
      [radius](double z) { return radius * std::cos(z); },
      [radius](double z) { return -radius * std::sin(z); },
      [radius](double z) { return -radius * std::cos(z); },
  };
  return std::make_shared<RevolutionSurface>(
      "sphere", domain, std::move(prof),
      nlohmann::json{{"radius", radius},
                     {"chart", "r = radius (sin z cos theta, sin z sin theta, cos z)"}});
}

SurfacePtr make_cylinder(double radius, CoordRect domain) {
  if (!(radius > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
  RevolutionProfile prof{
      [radius](double) { return radius; },
      [](double) { return 0.0; },
      [](double) { return 0.0; },
      [](double z) { return -z; },
      [](double) { return -1.0; },
      [](double) { return 0.0; },
  };
  return std::make_shared<RevolutionSurface>(
      "cylinder", domain, std::move(prof),
      nlohmann::json{{"radius", radius},
                     {"chart", "r = (radius cos theta, radius sin theta, -z)"}});
}

SurfacePtr make_pseudosphere(double neck, CoordRect domain) {
  if (!(neck > 0.0)) throw std::invalid_argument("catenoid neck radius must be positive");
  RevolutionProfile prof{
      [neck](double z) { return neck * std::cosh(z / neck); },
      [neck](double z) { return std::sinh(z / neck); },
      [neck](double z) { return std::cosh(z / neck) / neck; },
      [](double z) { return -z; },
      [](double) { return -1.0; },
      [](double) { return 0.0; },
  };
  return std::make_shared<RevolutionSurface>(
      "pseudospherical", domain, std::move(prof),
      nlohmann::json{
          {"neck", neck},
          {"profile", "catenoid"},
          {"chart", "r = (c cosh(z/c) cos theta, c cosh(z/c) sin theta, -z)"},
          {"gaussian_curvature", "-1 / (c^2 cosh^4(z/c))"}});
}

SurfacePtr swap_chart(SurfacePtr surface) {
  return std::make_shared<SwappedChart>(std::move(surface));
}

SurfacePtr make_surface(const SurfaceSpec& spec) {
  if (spec.name == "plate") {
    return spec.domain ? make_plate(*spec.domain) : make_plate();
  }
  if (spec.name == "sphere") {
    return spec.domain ? make_sphere(spec.radius, *spec.domain) : make_sphere(spec.radius);
  }
  if (spec.name == "cylinder") {
    return spec.domain ? make_cylinder(spec.radius, *spec.domain) : make_cylinder(spec.radius);
  }
  if (spec.name == "pseudospherical" || spec.name == "catenoid") {
    return spec.domain ? make_pseudosphere(spec.radius, *spec.domain)
                       : make_pseudosphere(spec.radius);
  }
  throw std::invalid_argument("unknown surface '" + spec.name +
                              "' (expected plate, cylinder, sphere or pseudospherical)");
}

Frame frame_at(const SurfacePoint& point) {
  return Frame{point.normal, point.d_theta / point.a_theta, point.d_z / point.a_z};
}

Frame frame_at(const ParamSurface& surface, double theta, double z) {
  return frame_at(surface.at(theta, z));
}

FrameDerivatives frame_derivatives(const SurfacePoint& p) {
  const Frame f = frame_at(p);
  FrameDerivatives d;
  d.d_theta.e_t = p.kappa_theta * p.a_theta * f.e_theta;
  d.d_theta.e_theta = -p.kappa_theta * p.a_theta * f.e_t - (p.da_theta_dz / p.a_z) * f.e_z;
  d.d_theta.e_z = (p.da_theta_dz / p.a_z) * f.e_theta;
  d.d_z.e_t = p.kappa_z * p.a_z * f.e_z;
  d.d_z.e_theta = (p.da_z_dtheta / p.a_theta) * f.e_z;
  d.d_z.e_z = -p.kappa_z * p.a_z * f.e_t - (p.da_z_dtheta / p.a_theta) * f.e_theta;
  return d;
}

double gaussian_curvature(const ParamSurface& surface, double theta, double z) {
  const SurfacePoint p = surface.at(theta, z);
  return p.kappa_theta * p.kappa_z;
}

double max_abs_curvature(const ParamSurface& surface, int samples_per_side) {
  const CoordRect& d = surface.domain();
  double kmax = 0.0;
  for (int i = 0; i < samples_per_side; ++i) {
    for (int j = 0; j < samples_per_side; ++j) {
      const double theta = d.theta_min + d.theta_extent() * i / (samples_per_side - 1);
      const double z = d.z_min + d.z_extent() * j / (samples_per_side - 1);
      const SurfacePoint p = surface.evaluate(theta, z);
      for (double k : {p.kappa_theta, p.kappa_z}) {
        if (std::isfinite(k)) kmax = std::max(kmax, std::abs(k));
      }
    }
  }
  return kmax;
}

double chart_limit_h0(const ParamSurface& surface) {
  const double kmax = max_abs_curvature(surface);
  return kmax > 0.0 ? 0.5 / kmax : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// ThicknessProfile

ThicknessProfile ThicknessProfile::shell(double h) {
  if (!(h > 0.0)) throw AdmissibilityError("thickness parameter h must be positive");
  ThicknessProfile p;
  p.kind_ = ProfileKind::shell;
  p.h_ = h;
  p.c1_ = 0.5;
  p.c2_ = 0.0;
  p.lower_factor_ = 0.5;
  return p;
}

ThicknessProfile ThicknessProfile::bump(double h, const CoordRect& patch, double amplitude,
                                        double c2) {
  if (!(h > 0.0)) throw AdmissibilityError("thickness parameter h must be positive");
  if (!(amplitude >= 0.0)) throw AdmissibilityError("bump amplitude must be nonnegative");
  ThicknessProfile p;
  p.kind_ = ProfileKind::bump;
  p.h_ = h;
  p.amplitude_ = amplitude;
  p.c1_ = std::max(1.5, 1.0 + amplitude);
  p.c2_ = c2;
  p.lower_factor_ = 1.0;
  p.patch_ = patch;
  return p;
}

ThicknessProfile ThicknessProfile::with_h(double h) const {
  ThicknessProfile p = *this;
  if (!(h > 0.0)) throw AdmissibilityError("thickness parameter h must be positive");
  p.h_ = h;
  return p;
}

double ThicknessProfile::s1(double theta, double z) const {
  const double u = 2.0 * std::numbers::pi * (theta - patch_.theta_min) / patch_.theta_extent();
  const double v = 2.0 * std::numbers::pi * (z - patch_.z_min) / patch_.z_extent();
  return 0.5 * (1.0 + std::sin(u) * std::sin(v));
}

double ThicknessProfile::s2(double theta, double z) const {
  const double u = 2.0 * std::numbers::pi * (theta - patch_.theta_min) / patch_.theta_extent();
  const double v = 2.0 * std::numbers::pi * (z - patch_.z_min) / patch_.z_extent();
  return 0.5 * (1.0 + std::cos(u) * std::cos(v));
}

double ThicknessProfile::g1(double theta, double z) const {
  if (kind_ == ProfileKind::shell) return 0.5 * h_;
  return h_ * (1.0 + amplitude_ * s1(theta, z));
}

double ThicknessProfile::g2(double theta, double z) const {
  if (kind_ == ProfileKind::shell) return 0.5 * h_;
  return h_ * (1.0 + amplitude_ * s2(theta, z));
}

Eigen::Vector2d ThicknessProfile::grad_g1(double theta, double z) const {
  if (kind_ == ProfileKind::shell) return Eigen::Vector2d::Zero();
  const double ku = 2.0 * std::numbers::pi / patch_.theta_extent();
  const double kv = 2.0 * std::numbers::pi / patch_.z_extent();
  const double u = ku * (theta - patch_.theta_min);
  const double v = kv * (z - patch_.z_min);
  const double f = 0.5 * h_ * amplitude_;
  return {f * ku * std::cos(u) * std::sin(v), f * kv * std::sin(u) * std::cos(v)};
}

Eigen::Vector2d ThicknessProfile::grad_g2(double theta, double z) const {
  if (kind_ == ProfileKind::shell) return Eigen::Vector2d::Zero();
  const double ku = 2.0 * std::numbers::pi / patch_.theta_extent();
  const double kv = 2.0 * std::numbers::pi / patch_.z_extent();
  const double u = ku * (theta - patch_.theta_min);
  const double v = kv * (z - patch_.z_min);
  const double f = 0.5 * h_ * amplitude_;
  return {-f * ku * std::sin(u) * std::cos(v), -f * kv * std::cos(u) * std::sin(v)};
}

nlohmann::json ThicknessProfile::parameters() const {
  nlohmann::json j{{"h", h_}, {"c1", c1_}, {"c2", c2_}, {"lower_factor", lower_factor_}};
  if (kind_ == ProfileKind::shell) {
    j["kind"] = "shell";
    j["g1"] = "h/2";
    j["g2"] = "h/2";
  } else {
    j["kind"] = "bump";
    j["amplitude"] = amplitude_;
    j["g1"] = "h (1 + a (1 + sin(2 pi u) sin(2 pi v)) / 2)";
    j["g2"] = "h (1 + a (1 + cos(2 pi u) cos(2 pi v)) / 2)";
    j["normalized_by"] = to_json(patch_);
  }
  return j;
}

// ---------------------------------------------------------------------------
// ThinDomain

ThinDomain::ThinDomain(SurfacePtr surface, ThicknessProfile profile, CoordRect rect, Unchecked)
    : surface_(std::move(surface)), profile_(std::move(profile)), rect_(rect) {}

ThinDomain::ThinDomain(SurfacePtr surface, ThicknessProfile profile, int samples_per_side)
    : surface_(std::move(surface)), profile_(std::move(profile)) {
  if (!surface_) throw std::invalid_argument("thin domain needs a surface");
  rect_ = surface_->domain();
  const double h = profile_.h();
  const double lo = profile_.lower_factor() * h;
  const double hi = profile_.c1() * h;
  const double tol = 1e-12 * h;
  const int n = std::max(samples_per_side, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double theta = rect_.theta_min + rect_.theta_extent() * i / (n - 1);
      const double z = rect_.z_min + rect_.z_extent() * j / (n - 1);
      const double g1 = profile_.g1(theta, z);
      const double g2 = profile_.g2(theta, z);
      if (g1 < lo - tol || g1 > hi + tol || g2 < lo - tol || g2 > hi + tol) {
        std::ostringstream msg;
        msg << "thickness profile violates " << profile_.lower_factor() << " h <= g <= "
            << profile_.c1() << " h at (theta, z) = (" << theta << ", " << z << "): g1 = " << g1
            << ", g2 = " << g2 << ", h = " << h;
        throw AdmissibilityError(msg.str());
      }
      const SurfacePoint p = surface_->evaluate(theta, z);
      if (!(p.a_theta > 0.0) || !(p.a_z > 0.0)) {
        std::ostringstream msg;
        msg << "metric coefficient vanishes at (theta, z) = (" << theta << ", " << z << ")";
        // Patches touching a coordinate pole are allowed when the pole sits on
        // the boundary; quadrature never samples it.
        const bool boundary = i == 0 || j == 0 || i == n - 1 || j == n - 1;
        if (!boundary) throw DomainError(msg.str());
        continue;
      }
      const Eigen::Vector2d d1 = profile_.grad_g1(theta, z);
      const Eigen::Vector2d d2 = profile_.grad_g2(theta, z);
      const double grad = std::hypot(d1[0] / p.a_theta, d1[1] / p.a_z) +
                          std::hypot(d2[0] / p.a_theta, d2[1] / p.a_z);
      if (grad > profile_.c2() * h + tol) {
        std::ostringstream msg;
        msg << "thickness profile violates |grad g1| + |grad g2| <= " << profile_.c2()
            << " h at (theta, z) = (" << theta << ", " << z << "): " << grad;
        throw AdmissibilityError(msg.str());
      }
      for (double kappa : {p.kappa_theta, p.kappa_z}) {
        if (1.0 - g1 * kappa <= 0.0 || 1.0 + g2 * kappa <= 0.0) {
          std::ostringstream msg;
          msg << "chart degenerates (1 + t kappa <= 0) at (theta, z) = (" << theta << ", " << z
              << ") for h = " << h << "; reduce h below " << chart_limit_h0(*surface_);
          throw ChartDegeneracyError(msg.str());
        }
      }
    }
  }
}

ThinDomain ThinDomain::restricted(const CoordRect& rect) const {
  if (!rect_.contains(rect)) throw DomainError("restriction rectangle leaves the patch");
  return ThinDomain(surface_, profile_, rect, Unchecked{});
}

ThinDomain ThinDomain::with_profile(ThicknessProfile profile) const {
  ThinDomain d(surface_, std::move(profile));
  return rect_.contains(surface_->domain()) ? d : d.restricted(rect_);
}

nlohmann::json ThinDomain::parameters() const {
  return {{"surface", surface_->parameters()},
          {"profile", profile_.parameters()},
          {"rect", to_json(rect_)}};
}

Vec3 embed(const ThinDomain& domain, double t, double theta, double z) {
  const SurfacePoint p = domain.surface().at(theta, z);
  const double g1 = domain.profile().g1(theta, z);
  const double g2 = domain.profile().g2(theta, z);
  const double tol = 1e-12 * domain.h();
  if (t < -g1 - tol || t > g2 + tol) {
    std::ostringstream msg;
    msg << "t = " << t << " outside (-g1, g2) = (" << -g1 << ", " << g2 << ") at (theta, z) = ("
        << theta << ", " << z << ")";
    throw DomainError(msg.str());
  }
  return p.position + t * p.normal;
}

double volume_jacobian(const SurfacePoint& p, double t) {
  const double ft = 1.0 + t * p.kappa_theta;
  const double fz = 1.0 + t * p.kappa_z;
  if (ft <= 0.0 || fz <= 0.0) {
    std::ostringstream msg;
    msg << "chart degenerates at t = " << t << " (1 + t kappa_theta = " << ft
        << ", 1 + t kappa_z = " << fz << "); h is too large for this surface";
    throw ChartDegeneracyError(msg.str());
  }
  return p.a_theta * p.a_z * ft * fz;
}

double volume_jacobian(const ThinDomain& domain, double t, double theta, double z) {
  return volume_jacobian(domain.surface().at(theta, z), t);
}

}  // namespace rigidity
