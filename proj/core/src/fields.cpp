#include "rigidity/fields.hpp"

#include "rigidity/errors.hpp"
#include "rigidity/matrixops.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

namespace rigidity {

FrameField::FrameField(FieldKind kind, Evaluator evaluator, std::string label,
                       PartialsSource source, double fd_step)
    : kind_(kind),
      evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
      label_(std::move(label)),
      source_(source),
      fd_step_(fd_step) {}

Vec3 to_euclidean(const Vec3& y, const Frame& f) {
  return y[0] * f.e_t + y[1] * f.e_theta + y[2] * f.e_z;
}

FrameField field_from_values(FieldKind kind, std::function<Vec3(const ChartPoint&)> values,
                             ChartBox box, std::string label, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  auto eval = [values = std::move(values), box, step](const ChartPoint& q) {
    FieldJet jet;
    jet.value = values(q);
    const double lo[3] = {box.t_min, box.rect.theta_min, box.rect.z_min};
    const double hi[3] = {box.t_max, box.rect.theta_max, box.rect.z_max};
    for (int j = 0; j < 3; ++j) {
      const auto shifted = [&](double d) {
        ChartPoint p = q;
        (j == 0 ? p.t : j == 1 ? p.theta : p.z) += d;
        return values(p);
      };
      const double x = j == 0 ? q.t : j == 1 ? q.theta : q.z;
      Vec3 d;
      if (x - step < lo[j]) {
        d = (-3.0 * jet.value + 4.0 * shifted(step) - shifted(2.0 * step)) / (2.0 * step);
      } else if (x + step > hi[j]) {
        d = (3.0 * jet.value - 4.0 * shifted(-step) + shifted(-2.0 * step)) / (2.0 * step);
      } else {
        d = (shifted(step) - shifted(-step)) / (2.0 * step);
      }
      jet.partials.col(j) = d;
    }
    return jet;
  };
  return FrameField(kind, std::move(eval), std::move(label), PartialsSource::finite_difference,
                    step);
}

FrameField euclidean_map_field(SurfacePtr surface, FieldKind kind,
                               std::function<Vec3(const Vec3&)> map,
                               std::function<Mat3(const Vec3&)> jacobian, std::string label) {
  auto eval = [surface = std::move(surface), map = std::move(map),
               jacobian = std::move(jacobian)](const ChartPoint& q) {
    const SurfacePoint sp = surface->evaluate(q.theta, q.z);
    const Frame f = frame_at(sp);
    const FrameDerivatives df = frame_derivatives(sp);
    const Vec3 x = sp.position + q.t * sp.normal;
    const Vec3 y = map(x);
    const Mat3 dy = jacobian(x);

    const Vec3 x_t = sp.normal;
    const Vec3 x_theta = sp.a_theta * (1.0 + q.t * sp.kappa_theta) * f.e_theta;
    const Vec3 x_z = sp.a_z * (1.0 + q.t * sp.kappa_z) * f.e_z;
    const Vec3 y_t = dy * x_t;
    const Vec3 y_theta = dy * x_theta;
    const Vec3 y_z = dy * x_z;

    const Vec3* e[3] = {&f.e_t, &f.e_theta, &f.e_z};
    const Vec3* de_theta[3] = {&df.d_theta.e_t, &df.d_theta.e_theta, &df.d_theta.e_z};
    const Vec3* de_z[3] = {&df.d_z.e_t, &df.d_z.e_theta, &df.d_z.e_z};
    FieldJet jet;
    for (int k = 0; k < 3; ++k) {
      jet.value[k] = y.dot(*e[k]);
      jet.partials(k, 0) = y_t.dot(*e[k]);
      jet.partials(k, 1) = y_theta.dot(*e[k]) + y.dot(*de_theta[k]);
      jet.partials(k, 2) = y_z.dot(*e[k]) + y.dot(*de_z[k]);
    }
    return jet;
  };
  return FrameField(kind, std::move(eval), std::move(label));
}

FrameField identity_field(SurfacePtr surface) {
  return euclidean_map_field(
      std::move(surface), FieldKind::deformation, [](const Vec3& x) { return x; },
      [](const Vec3&) { return Mat3::Identity(); }, "identity");
}

FrameField identity_displacement(SurfacePtr surface) {
  return euclidean_map_field(
      std::move(surface), FieldKind::displacement, [](const Vec3& x) { return x; },
      [](const Vec3&) { return Mat3::Identity(); }, "identity-displacement");
}

FrameField rigid_field(SurfacePtr surface, const Mat3& q, const Vec3& c) {
  return euclidean_map_field(
      std::move(surface), FieldKind::deformation, [q, c](const Vec3& x) { return Vec3(q * x + c); },
      [q](const Vec3&) { return q; }, "rigid");
}

FrameField rigid_field_from_seed(SurfacePtr surface, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const Vec3 axis(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
  const double angle = 3.0 * uniform();
  const Mat3 q = rotation_from_axis_angle(axis.normalized() * angle);
  const Vec3 c(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
  FrameField f = rigid_field(std::move(surface), q, c);
  return FrameField(f.kind(), [f](const ChartPoint& p) { return f(p); },
                    "rigid:" + std::to_string(seed));
}

FrameField affine_displacement(SurfacePtr surface, const Mat3& a, const Vec3& c,
                               std::string label) {
  return euclidean_map_field(
      std::move(surface), FieldKind::displacement, [a, c](const Vec3& x) { return Vec3(a * x + c); },
      [a](const Vec3&) { return a; }, std::move(label));
}

FrameField polynomial_test_field(SurfacePtr surface, double amplitude) {
  const Vec3 a(0.3, -0.2, 0.1);
  const Vec3 b(0.1, 0.2, -0.3);
  return euclidean_map_field(
      std::move(surface), FieldKind::deformation,
      [=](const Vec3& x) { return Vec3(x + amplitude * (x.squaredNorm() * a + x[0] * x[1] * x[2] * b)); },
      [=](const Vec3& x) {
        const Vec3 g(x[1] * x[2], x[0] * x[2], x[0] * x[1]);
        return Mat3(Mat3::Identity() + amplitude * (2.0 * a * x.transpose() + b * g.transpose()));
      },
      "polynomial");
}

FrameField identity_plus(SurfacePtr surface, double eps, const FrameField& displacement) {
  const FrameField id = identity_field(std::move(surface));
  std::ostringstream label;
  label << "x + " << eps << " * " << displacement.label();
  return FrameField(
      FieldKind::deformation,
      [id, eps, displacement](const ChartPoint& q) {
        FieldJet a = id(q);
        const FieldJet b = displacement(q);
        a.value += eps * b.value;
        a.partials += eps * b.partials;
        return a;
      },
      label.str(), displacement.partials_source(), displacement.fd_step());
}

FrameField scaled(const FrameField& f, double a) {
  std::ostringstream label;
  label << a << " * " << f.label();
  return FrameField(
      f.kind(),
      [f, a](const ChartPoint& q) {
        FieldJet j = f(q);
        j.value *= a;
        j.partials *= a;
        return j;
      },
      label.str(), f.partials_source(), f.fd_step());
}

FrameField sum(const FrameField& a, const FrameField& b) {
  const PartialsSource src = a.partials_source() == PartialsSource::analytic &&
                                     b.partials_source() == PartialsSource::analytic
                                 ? PartialsSource::analytic
                                 : PartialsSource::finite_difference;
  return FrameField(
      a.kind(),
      [a, b](const ChartPoint& q) {
        FieldJet ja = a(q);
        const FieldJet jb = b(q);
        ja.value += jb.value;
        ja.partials += jb.partials;
        return ja;
      },
      a.label() + " + " + b.label(), src, std::max(a.fd_step(), b.fd_step()));
}

Mat3 frame_gradient(const FieldJet& jet, const SurfacePoint& p, double t) {
  const double ft = 1.0 + t * p.kappa_theta;
  const double fz = 1.0 + t * p.kappa_z;
  if (ft <= 0.0 || fz <= 0.0) {
    std::ostringstream msg;
    msg << "frame_gradient: chart degenerates at t = " << t;
    throw ChartDegeneracyError(msg.str());
  }
  const double at = p.a_theta;
  const double az = p.a_z;
  const double at_z = p.da_theta_dz;
  const double az_t = p.da_z_dtheta;
  const double kt = p.kappa_theta;
  const double kz = p.kappa_z;
  const Vec3& y = jet.value;
  const Mat3& d = jet.partials;  // d(k, j): component k, coordinate j
  enum { T = 0, TH = 1, Z = 2 };

  Mat3 g;
  g(0, 0) = d(T, T);
  g(0, 1) = (d(T, TH) - at * kt * y[TH]) / (at * ft);
  g(0, 2) = (d(T, Z) - az * kz * y[Z]) / (az * fz);

  g(1, 0) = d(TH, T);
  g(1, 1) = (az * d(TH, TH) + az * at * kt * y[T] + at_z * y[Z]) / (az * at * ft);
  g(1, 2) = (at * d(TH, Z) - az_t * y[Z]) / (az * at * fz);

  g(2, 0) = d(Z, T);
  g(2, 1) = (az * d(Z, TH) - at_z * y[TH]) / (az * at * ft);
  g(2, 2) = (at * d(Z, Z) + az * at * kz * y[T] + az_t * y[TH]) / (az * at * fz);
  return g;
}

Mat3 frame_gradient(const FrameField& field, const ParamSurface& surface, double t,
                    double theta, double z) {
  const SurfacePoint p = surface.at(theta, z);
  return frame_gradient(field(ChartPoint{t, theta, z}), p, t);
}

Mat3 linear_strain(const FrameField& field, const ParamSurface& surface, double t, double theta,
                   double z) {
  const Mat3 g = frame_gradient(field, surface, t, theta, z);
  return 0.5 * (g + g.transpose());
}

Mat3 euclidean_gradient_oracle(const FrameField& field, const ThinDomain& domain, double t,
                               double theta, double z, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("oracle step must be positive");
  const CoordRect& rect = domain.rect();
  const double g1 = domain.profile().g1(theta, z);
  const double g2 = domain.profile().g2(theta, z);
  if (t - step < -g1 || t + step > g2) {
    throw DomainError("euclidean_gradient_oracle: step leaves the thickness interval in t");
  }
  if (theta - step < rect.theta_min || theta + step > rect.theta_max) {
    throw DomainError("euclidean_gradient_oracle: step leaves the patch in theta");
  }
  if (z - step < rect.z_min || z + step > rect.z_max) {
    throw DomainError("euclidean_gradient_oracle: step leaves the patch in z");
  }
  const ParamSurface& surface = domain.surface();
  const auto chart = [&](const ChartPoint& q) {
    const SurfacePoint sp = surface.evaluate(q.theta, q.z);
    return Vec3(sp.position + q.t * sp.normal);
  };
  const auto euclidean_field = [&](const ChartPoint& q) {
    return to_euclidean(field.value(q), frame_at(surface.evaluate(q.theta, q.z)));
  };

  Mat3 jx;
  Mat3 jy;
  for (int j = 0; j < 3; ++j) {
    ChartPoint plus{t, theta, z};
    ChartPoint minus{t, theta, z};
    (j == 0 ? plus.t : j == 1 ? plus.theta : plus.z) += step;
    (j == 0 ? minus.t : j == 1 ? minus.theta : minus.z) -= step;
    jx.col(j) = (chart(plus) - chart(minus)) / (2.0 * step);
    jy.col(j) = (euclidean_field(plus) - euclidean_field(minus)) / (2.0 * step);
  }
  const Mat3 dy = jy * jx.inverse();
  const Mat3 e = frame_at(surface.evaluate(theta, z)).matrix();
  return e.transpose() * dy * e;
}

FrameField random_smooth_field(unsigned long long seed, double amplitude, int modes,
                               SurfacePtr surface) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("random field amplitude must be >= 0");
  if (modes < 1) throw std::invalid_argument("random field needs at least one mode");
  struct Mode {
    double coeff, w_t, w_theta, w_z, phase;
  };
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Mode> table;
  table.reserve(3 * modes);
  for (int k = 0; k < 3; ++k) {
    for (int m = 0; m < modes; ++m) {
      const double scale = 1.0 + m;
      Mode mode;
      mode.coeff = amplitude * (2.0 * uniform() - 1.0) / scale;
      mode.w_t = scale * (2.0 * uniform() - 1.0);
      mode.w_theta = scale * (2.0 * uniform() - 1.0);
      mode.w_z = scale * (2.0 * uniform() - 1.0);
      mode.phase = 6.283185307179586 * uniform();
      table.push_back(mode);
    }
  }
  (void)surface;  // frame components do not depend on the surface geometry
  auto eval = [table = std::move(table), modes](const ChartPoint& q) {
    FieldJet jet;
    for (int k = 0; k < 3; ++k) {
      for (int m = 0; m < modes; ++m) {
        const Mode& md = table[k * modes + m];
        const double arg = md.w_t * q.t + md.w_theta * q.theta + md.w_z * q.z + md.phase;
        const double s = std::sin(arg);
        const double c = std::cos(arg);
        jet.value[k] += md.coeff * s;
        jet.partials(k, 0) += md.coeff * md.w_t * c;
        jet.partials(k, 1) += md.coeff * md.w_theta * c;
        jet.partials(k, 2) += md.coeff * md.w_z * c;
      }
    }
    return jet;
  };
  return FrameField(FieldKind::displacement, std::move(eval), "random:" + std::to_string(seed));
}

}  // namespace rigidity
