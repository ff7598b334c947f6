#include "rigidity/errors.hpp"
#include "rigidity/fields.hpp"
#include "rigidity/matrixops.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rigidity;
using rigidity::testing::builtin_surfaces;
using rigidity::testing::interior_point;
using rigidity::testing::random_rotation;
using rigidity::testing::random_vector;

namespace {

struct Probe {
  double t, theta, z;
};

std::vector<Probe> probes(const ThinDomain& d, int count, unsigned seed, double margin = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<Probe> out;
  for (int i = 0; i < count; ++i) {
    auto [theta, z] = interior_point(d.rect(), rng, margin);
    out.push_back({u(rng) * d.h(), theta, z});
  }
  return out;
}

AnsatzProfile sphere_ansatz(double eps) {
  AnsatzProfile a = AnsatzProfile::centered_on(make_sphere()->domain());
  a.xi_half = 0.4 * 0.5 / std::sqrt(0.1);
  a.epsilon = eps;
  return a;
}

}  // namespace

TEST(FrameGradient, IdentityOnSphere) {
  const auto sphere = make_sphere();
  const FrameField id = identity_field(sphere);
  const FieldJet jet = id({0.01, 0.1, 1.3});
  EXPECT_NEAR(jet.value[0], 1.01, 1e-14);
  EXPECT_NEAR(jet.value[1], 0.0, 1e-14);
  EXPECT_NEAR(jet.value[2], 0.0, 1e-14);
  for (const auto& p : probes(ThinDomain(sphere, ThicknessProfile::shell(0.1)), 50, 1)) {
    EXPECT_LE((frame_gradient(id, *sphere, p.t, p.theta, p.z) - Mat3::Identity()).norm(), 1e-12);
  }
}

TEST(FrameGradient, RigidMotionsHaveZeroDistance) {
  std::mt19937_64 rng(2);
  for (const auto& s : builtin_surfaces()) {
    const ThinDomain d(s, ThicknessProfile::shell(0.05));
    for (int k = 0; k < 20; ++k) {
      const FrameField y = rigid_field(s, random_rotation(rng), random_vector(rng));
      for (const auto& p : probes(d, 10, k)) {
        EXPECT_LE(dist_so3(frame_gradient(y, *s, p.t, p.theta, p.z)), 1e-10) << s->name();
      }
    }
  }
}

TEST(FrameGradient, RigidMotionIsFrameRepresentationOfQ) {
  std::mt19937_64 rng(3);
  const auto cyl = make_cylinder();
  const Mat3 q = random_rotation(rng);
  const FrameField y = rigid_field(cyl, q, Vec3(1, 2, 3));
  const Mat3 e = frame_at(*cyl, 0.1, 0.2).matrix();
  EXPECT_LE((frame_gradient(y, *cyl, 0.01, 0.1, 0.2) - e.transpose() * q * e).norm(), 1e-12);
}

TEST(FrameGradient, MatchesOracleOnEverySurface) {
  for (const auto& s : builtin_surfaces()) {
    const double h = 0.1;
    const ThinDomain d(s, ThicknessProfile::shell(h));
    for (const FrameField& f :
         {polynomial_test_field(s), random_smooth_field(7, 0.1, 4, s)}) {
      for (const auto& p : probes(d, 100, 4)) {
        const Mat3 g = frame_gradient(f, *s, p.t, p.theta, p.z);
        const Mat3 o = euclidean_gradient_oracle(f, d, p.t, p.theta, p.z, 1e-4);
        EXPECT_LE((g - o).norm(), 1e-6) << s->name() << " " << f.label();
      }
    }
  }
}

TEST(FrameGradient, OracleIsSecondOrder) {
  const auto cyl = make_cylinder();
  const ThinDomain d(cyl, ThicknessProfile::shell(0.1));
  const FrameField f = random_smooth_field(3, 0.5, 4, cyl);
  double e1 = 0.0, e2 = 0.0;
  for (const auto& p : probes(d, 50, 5)) {
    const Mat3 g = frame_gradient(f, *cyl, p.t, p.theta, p.z);
    e1 += (g - euclidean_gradient_oracle(f, d, p.t, p.theta, p.z, 2e-3)).norm();
    e2 += (g - euclidean_gradient_oracle(f, d, p.t, p.theta, p.z, 1e-3)).norm();
  }
  EXPECT_GE(e1 / e2, 3.5);
  EXPECT_LE(e1 / e2, 4.5);
}

TEST(FrameGradient, OracleStepLeavingChartThrows) {
  const auto plate = make_plate();
  const ThinDomain d(plate, ThicknessProfile::shell(0.1));
  const FrameField f = polynomial_test_field(plate);
  EXPECT_THROW(euclidean_gradient_oracle(f, d, 0.0, 0.5, 0.5, 0.2), DomainError);
  EXPECT_THROW(euclidean_gradient_oracle(f, d, 0.0, 0.001, 0.5, 0.01), DomainError);
}

TEST(FrameGradient, DegenerateChartThrows) {
  const auto sphere = make_sphere();
  EXPECT_THROW(frame_gradient(identity_field(sphere), *sphere, -1.2, 0.0, 1.5),
               ChartDegeneracyError);
}

// Relabelling (theta, z) permutes the frame; the Frobenius norm of the
// Euclidean gradient is unchanged.
TEST(FrameGradient, ChartSwapPreservesNorm) {
  std::mt19937_64 rng(6);
  for (const auto& s : builtin_surfaces()) {
    const auto w = swap_chart(s);
    const Mat3 a = Mat3::Random() * 0.3;
    const Vec3 c = Vec3::Random();
    const auto map = [a, c](const Vec3& x) -> Vec3 { return a * x + c + 0.1 * x.squaredNorm() * Vec3::UnitX(); };
    const auto jac = [a](const Vec3& x) -> Mat3 {
      Mat3 j = a;
      j.row(0) += 0.2 * x.transpose();
      return j;
    };
    const FrameField fs = euclidean_map_field(s, FieldKind::displacement, map, jac, "quad");
    const FrameField fw = euclidean_map_field(w, FieldKind::displacement, map, jac, "quad");
    for (int i = 0; i < 20; ++i) {
      auto [theta, z] = interior_point(s->domain(), rng, 0.1);
      const double t = 0.01;
      EXPECT_NEAR(frame_gradient(fs, *s, t, theta, z).norm(),
                  frame_gradient(fw, *w, t, z, theta).norm(), 1e-10)
          << s->name();
    }
  }
}

TEST(LinearStrain, SkewMapHasNoStrain) {
  for (const auto& s : builtin_surfaces()) {
    const FrameField u = affine_displacement(s, skew(Vec3(0.3, -0.2, 0.5)), Vec3(1, 0, 0));
    const CoordRect r = s->domain();
    EXPECT_LE(linear_strain(u, *s, 0.02, r.theta_center(), r.z_center()).norm(), 1e-10);
  }
}

TEST(LinearStrain, IdentityDisplacement) {
  const auto sphere = make_sphere();
  const Mat3 e = linear_strain(identity_displacement(sphere), *sphere, 0.03, 0.2, 1.4);
  EXPECT_LE((e - Mat3::Identity()).norm(), 1e-12);
}

TEST(FieldFromValues, FiniteDifferencePartials) {
  const auto plate = make_plate();
  const ChartBox box{-0.05, 0.05, plate->domain()};
  const FrameField f = field_from_values(
      FieldKind::displacement,
      [](const ChartPoint& q) { return Vec3(q.theta * q.z, std::sin(q.theta), q.t * q.t); }, box,
      "values");
  EXPECT_EQ(f.partials_source(), PartialsSource::finite_difference);
  const FieldJet j = f({0.01, 0.3, 0.6});
  EXPECT_NEAR(j.partials(0, 1), 0.6, 1e-8);
  EXPECT_NEAR(j.partials(0, 2), 0.3, 1e-8);
  EXPECT_NEAR(j.partials(1, 1), std::cos(0.3), 1e-8);
  EXPECT_NEAR(j.partials(2, 0), 0.02, 1e-8);
  // One-sided differences at the faces stay inside the box.
  const FieldJet edge = f({0.05, 0.0, 1.0});
  EXPECT_NEAR(edge.partials(0, 1), 1.0, 1e-6);
  EXPECT_NEAR(edge.partials(2, 0), 0.1, 1e-4);
}

TEST(RandomField, DeterministicAndScalable) {
  const auto sphere = make_sphere();
  const FrameField a = random_smooth_field(1, 0.1, 4, sphere);
  const FrameField b = random_smooth_field(1, 0.1, 4, sphere);
  const FrameField c = random_smooth_field(2, 0.1, 4, sphere);
  const FrameField zero = random_smooth_field(1, 0.0, 4, sphere);
  const ChartPoint q{0.01, 0.2, 1.3};
  EXPECT_EQ(a.value(q), b.value(q));
  EXPECT_EQ(a(q).partials, b(q).partials);
  EXPECT_NE(a.value(q), c.value(q));
  EXPECT_EQ(zero.value(q).norm(), 0.0);
  EXPECT_THROW(random_smooth_field(1, -1.0, 4, sphere), std::invalid_argument);
  EXPECT_THROW(random_smooth_field(1, 1.0, 0, sphere), std::invalid_argument);
}

TEST(FieldAlgebra, ScaledAndSum) {
  const auto plate = make_plate();
  const FrameField a = random_smooth_field(4, 1.0, 3, plate);
  const FrameField b = random_smooth_field(5, 1.0, 3, plate);
  const ChartPoint q{0.0, 0.4, 0.6};
  EXPECT_LE((scaled(a, 2.5)(q).partials - 2.5 * a(q).partials).norm(), 1e-14);
  EXPECT_LE((sum(a, b).value(q) - a.value(q) - b.value(q)).norm(), 1e-14);
  const FrameField y = identity_plus(plate, 1e-3, a);
  EXPECT_EQ(y.kind(), FieldKind::deformation);
  EXPECT_LE((frame_gradient(y, *plate, 0.0, 0.4, 0.6) - Mat3::Identity() -
             1e-3 * frame_gradient(a, *plate, 0.0, 0.4, 0.6))
                .norm(),
            1e-14);
}

TEST(Ansatz, ZeroProfileGivesZeroField) {
  const auto sphere = make_sphere();
  const FrameField u = ansatz_field(AnsatzProfile::zero(), sphere, 0.01);
  const FieldJet j = u({0.001, 0.0, 1.5});
  EXPECT_EQ(j.value.norm(), 0.0);
  EXPECT_EQ(j.partials.norm(), 0.0);
}

TEST(Ansatz, MatchesOracle) {
  const auto sphere = make_sphere();
  for (double h : {0.1, 0.01}) {
    const ThinDomain d(sphere, ThicknessProfile::shell(h));
    const FrameField u = ansatz_field(sphere_ansatz(h), sphere, h);
    for (const auto& p : probes(d, 50, 8, 0.3)) {
      const Mat3 g = frame_gradient(u, *sphere, p.t, p.theta, p.z);
      // The ansatz varies on a sqrt(h) length scale; the difference step follows it.
      const Mat3 o = euclidean_gradient_oracle(u, d, p.t, p.theta, p.z, 1e-4 * std::sqrt(h));
      EXPECT_LE((g - o).norm(), 1e-5 * std::max(1.0, g.norm())) << h;
    }
  }
}

TEST(Ansatz, TangentialComponentIsSqrtHSmaller) {
  const auto sphere = make_sphere();
  for (double h : {1e-2, 1e-3}) {
    const FrameField u = ansatz_field(sphere_ansatz(h), sphere, h);
    const ThinDomain d(sphere, ThicknessProfile::shell(h));
    double ut = 0.0, uth = 0.0;
    for (const auto& p : probes(d, 4000, 9, 0.0)) {
      const Vec3 v = u.value({h / 2, p.theta, p.z});
      ut = std::max(ut, std::abs(v[0]));
      uth = std::max(uth, std::abs(v[1]));
    }
    ASSERT_GT(ut, 0.1);
    const double scaled = uth / ut / std::sqrt(h);
    EXPECT_GT(scaled, 0.05) << h;
    EXPECT_LT(scaled, 10.0) << h;
  }
}

TEST(Ansatz, VanishesOutsideSupport) {
  const auto sphere = make_sphere();
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const AnsatzProfile a = sphere_ansatz(h);
    const FrameField u = ansatz_field(a, sphere, h);
    const double edge = a.xi_half * std::sqrt(h);
    for (double dtheta : {1.001 * edge, 1.5 * edge}) {
      for (double z : {1.3, 1.57, 1.8}) {
        const FieldJet j = u({0.3 * h, a.theta_center + dtheta, z});
        EXPECT_EQ(j.value.norm(), 0.0);
        EXPECT_EQ(j.partials.norm(), 0.0);
      }
    }
    const FieldJet j = u({0.3 * h, a.theta_center, a.z_center + 1.01 * a.z_half});
    EXPECT_EQ(j.value.norm(), 0.0);
    EXPECT_EQ(j.partials.norm(), 0.0);
  }
}

TEST(Ansatz, SupportLeavingPatchThrows) {
  const auto sphere = make_sphere();
  AnsatzProfile a = AnsatzProfile::centered_on(sphere->domain());
  a.xi_half = 100.0;
  EXPECT_THROW(ansatz_field(a, sphere, 0.01), DomainError);
}

TEST(Ansatz, StrainSmallerThanGradient) {
  const auto sphere = make_sphere();
  double previous = 0.0;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const FrameField u = ansatz_field(sphere_ansatz(h), sphere, h);
    const ThinDomain d(sphere, ThicknessProfile::shell(h));
    double g = 0.0, e = 0.0;
    for (const auto& p : probes(d, 3000, 10, 0.0)) {
      const Mat3 grad = frame_gradient(u, *sphere, p.t, p.theta, p.z);
      g = std::max(g, grad.norm());
      e = std::max(e, (0.5 * (grad + grad.transpose())).norm());
    }
    const double factor = g / e;
    EXPECT_GT(factor, 1.0) << h;
    EXPECT_GT(factor, previous) << h;
    previous = factor;
  }
}

TEST(Ansatz, SmallEpsilonApproachesRotations) {
  const auto sphere = make_sphere();
  const double h = 0.01;
  const FrameField u = ansatz_field(sphere_ansatz(h), sphere, h);
  const ThinDomain d(sphere, ThicknessProfile::shell(h));
  double previous = 1e300;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const FrameField y = identity_plus(sphere, eps, u);
    double worst = 0.0;
    for (const auto& p : probes(d, 500, 11, 0.2)) {
      worst = std::max(worst, dist_so3(frame_gradient(y, *sphere, p.t, p.theta, p.z)));
    }
    EXPECT_LT(worst, previous);
    previous = worst;
  }
  EXPECT_LT(previous, 1e-2);
}
