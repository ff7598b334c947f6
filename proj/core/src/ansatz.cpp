#include "rigidity/errors.hpp"
#include "rigidity/fields.hpp"

#include <cmath>
#include <sstream>

namespace rigidity {

namespace {

// b(s) = (1 - s^2)^4 on [-1, 1], zero outside; C^3 across |s| = 1.
struct BumpJet {
  double b = 0.0, db = 0.0, ddb = 0.0;
};

BumpJet bump(double s) {
  if (std::abs(s) >= 1.0) return {};
  const double q = 1.0 - s * s;
  const double q2 = q * q;
  return {q2 * q2, -8.0 * s * q2 * q, -8.0 * q2 * q + 48.0 * s * s * q2};
}

}  // namespace

AnsatzProfile AnsatzProfile::centered_on(const CoordRect& rect) {
  AnsatzProfile p;
  p.theta_center = rect.theta_center();
  p.z_center = rect.z_center();
  p.z_half = 0.4 * rect.z_extent();
  return p;
}

AnsatzProfile AnsatzProfile::zero() {
  AnsatzProfile p;
  p.zero_ = true;
  return p;
}

AnsatzProfile::Jet AnsatzProfile::evaluate(double xi, double z) const {
  if (zero_) return {};
  const BumpJet bx = bump(xi / xi_half);
  const BumpJet bz = bump((z - z_center) / z_half);
  Jet j;
  j.w = bx.b * bz.b;
  j.w_xi = bx.db / xi_half * bz.b;
  j.w_xixi = bx.ddb / (xi_half * xi_half) * bz.b;
  j.w_z = bx.b * bz.db / z_half;
  j.w_xiz = bx.db / xi_half * bz.db / z_half;
  j.w_zz = bx.b * bz.ddb / (z_half * z_half);
  return j;
}

nlohmann::json AnsatzProfile::parameters() const {
  return {{"W", zero_ ? "0" : "b(xi / xi_half) b((z - z_center) / z_half), b(s) = (1 - s^2)^4"},
          {"xi_half", xi_half},
          {"theta_center", theta_center},
          {"z_center", z_center},
          {"z_half", z_half},
          {"epsilon", epsilon}};
}

FrameField ansatz_field(const AnsatzProfile& profile, SurfacePtr surface, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("ansatz_field: h must be positive");
  const double sqrt_h = std::sqrt(h);
  const CoordRect& rect = surface->domain();
  if (!profile.is_zero()) {
    const double th_lo = profile.theta_center - profile.xi_half * sqrt_h;
    const double th_hi = profile.theta_center + profile.xi_half * sqrt_h;
    const double z_lo = profile.z_center - profile.z_half;
    const double z_hi = profile.z_center + profile.z_half;
    if (th_lo < rect.theta_min || th_hi > rect.theta_max || z_lo < rect.z_min ||
        z_hi > rect.z_max) {
      std::ostringstream msg;
      msg << "ansatz support [" << th_lo << ", " << th_hi << "] x [" << z_lo << ", " << z_hi
          << "] leaves the patch; use a smaller support, a smaller h or a larger patch";
      throw DomainError(msg.str());
    }
  }
  std::ostringstream label;
  label << "ansatz(h=" << h << ")";
  auto eval = [profile, surface = std::move(surface), sqrt_h, h](const ChartPoint& q) {
    FieldJet jet;
    const double xi = (q.theta - profile.theta_center) / sqrt_h;
    const AnsatzProfile::Jet w = profile.evaluate(xi, q.z);
    if (w.w == 0.0 && w.w_xi == 0.0 && w.w_z == 0.0 && w.w_xixi == 0.0 && w.w_zz == 0.0) {
      return jet;
    }
    const SurfacePoint sp = surface->evaluate(q.theta, q.z);
    const double at = sp.a_theta;
    const double az = sp.a_z;
    const double t = q.t;

    jet.value[0] = w.w;
    jet.value[1] = -t * w.w_xi / (at * sqrt_h);
    jet.value[2] = -t * w.w_z / az;

    // d/dtheta of W(xi(theta), z) carries 1 / sqrt(h).
    jet.partials(0, 0) = 0.0;
    jet.partials(0, 1) = w.w_xi / sqrt_h;
    jet.partials(0, 2) = w.w_z;

    jet.partials(1, 0) = -w.w_xi / (at * sqrt_h);
    jet.partials(1, 1) =
        -t * w.w_xixi / (at * h) + t * w.w_xi * sp.da_theta_dtheta / (at * at * sqrt_h);
    jet.partials(1, 2) =
        -t * w.w_xiz / (at * sqrt_h) + t * w.w_xi * sp.da_theta_dz / (at * at * sqrt_h);

    jet.partials(2, 0) = -w.w_z / az;
    jet.partials(2, 1) = -t * w.w_xiz / (sqrt_h * az) + t * w.w_z * sp.da_z_dtheta / (az * az);
    jet.partials(2, 2) = -t * w.w_zz / az + t * w.w_z * sp.da_z_dz / (az * az);
    return jet;
  };
  return FrameField(FieldKind::displacement, std::move(eval), label.str());
}

}  // namespace rigidity
