#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "pmc/moments.hpp"

using namespace pmc;

namespace {

// Composite Simpson over the polar angle measured from the left pole, where
// the outward normal is (-cos t, sin t) and <e0, N> = -cos t.
double simpson_moment(const std::function<double(double, double, double)>& F, double c, int n = 20000) {
  auto g = [&](double t) {
    const double x0 = c - std::cos(t), rho = std::sin(t);
    return F(x0, rho, -std::cos(t)) * (-std::cos(t)) * 2.0 * pi * rho;
  };
  const double h = pi / n;
  double acc = g(0.0) + g(pi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST(FMoment, ConstantVanishes) {
  for (double c : {-3.0, 0.0, 2.5}) EXPECT_NEAR(f_moment(PMCFunction::expression("1"), c, 32), 0.0, 1e-14);
}

TEST(FMoment, RotatingDropMatchesIndependentQuadrature) {
  for (double C : {-1.0, 1.0})
    for (double c : {-3.0, 0.0, 2.5}) {
      const double ref = simpson_moment([C](double x0, double, double) { return C * x0 * x0; }, c);
      EXPECT_NEAR(ref, 8.0 * pi / 3.0 * C * c, 1e-10);
      EXPECT_NEAR(f_moment(PMCFunction::rotating_drop(C), c, 32), ref, 1e-10);
    }
}

TEST(FMoment, JacobiFieldSquared) {
  for (double c : {-1.0, 0.4}) {
    const double ref = simpson_moment([](double, double, double n0) { return n0; }, c);
    EXPECT_NEAR(ref, 4.0 * pi / 3.0, 1e-10);
    EXPECT_NEAR(f_moment(PMCFunction::expression("N0"), c, 32), ref, 1e-10);
  }
}

TEST(FMoment, NonconvergenceAndBadOrder) {
  EXPECT_THROW(f_moment(PMCFunction::rotating_drop(1), 0.0, 2), Error);
  try {
    f_moment(PMCFunction::expression("sin(40*p0)*exp(p0)"), 0.0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::QuadratureNonconvergence);
  }
}

TEST(FMomentGeneral, AgreesWithSphereMoment) {
  const auto F = PMCFunction::expression("p0^3 - 2*Nrho + rho");
  for (double c : {-1.5, 0.25}) {
    const ProfileCurve curve = sphere_profile(c, 64);
    EXPECT_NEAR(f_moment_general(F, curve, 32), f_moment(F, c, 32), 1e-10);
  }
}

TEST(FMomentGeneral, ConstantOverClosedSphereVanishes) {
  EXPECT_NEAR(f_moment_general(PMCFunction::expression("1"), sphere_profile(0.3, 100), 16), 0.0, 1e-10);
}

// <e0, N> = -drho and dVol = 2 pi rho dt, so the integrand of F = 1 is the
// exact derivative of -pi rho^2.
TEST(FMomentGeneral, CatenoidSegmentAntiderivative) {
  const double eps = 0.2;
  const ProfileCurve c = catenoid_profile(eps, 0.0, 0.3, 200);
  const double a = c[0].rho, b = c[c.size() - 1].rho;
  EXPECT_NEAR(f_moment_general(PMCFunction::expression("1"), c, 16), -pi * (b * b - a * a), 1e-10);


  // one-sided piece u in [-0.5, 1.5]
  std::vector<ProfileSample> smp;
  for (int i = 0; i <= 200; ++i) {
    const double u = -0.5 + 2.0 * i / 200;
    smp.push_back({eps * (std::sinh(u) + std::sinh(0.5)), eps * u, eps * std::cosh(u), 1.0 / std::cosh(u), std::tanh(u)});
  }
  AnalyticTag tag;
  tag.catenoid = CatenoidTag{eps, 0.0};
  const ProfileCurve piece(std::move(smp), tag, false, false);
  const double a2 = eps * std::cosh(0.5), b2 = eps * std::cosh(1.5);
  EXPECT_NEAR(f_moment_general(PMCFunction::expression("1"), piece, 16), -pi * (b2 * b2 - a2 * a2), 1e-10);
}

TEST(MomentSum, RotatingDropBalancedAtMinusTwo) {
  const std::vector<double> sigma(2, 0.0);
  EXPECT_NEAR(moment_sum(PMCFunction::rotating_drop(-1), -2.0, 3, sigma).total(), 0.0, 1e-12);
  const MomentVector m = moment_sum(PMCFunction::rotating_drop(-1), -1.0, 3, sigma);
  EXPECT_NEAR(m.total(), -8.0 * pi * (-1.0 + 2.0), 1e-10);
}

TEST(MomentSum, ConstantAndSingleSphere) {
  const std::vector<double> sigma{0.1, 0.3};
  EXPECT_NEAR(moment_sum(PMCFunction::expression("1"), 0.7, 3, sigma).total(), 0.0, 1e-13);
  const auto F = PMCFunction::expression("exp(p0)*N0");
  EXPECT_EQ(moment_sum(F, 0.4, 1, {}).total(), f_moment(F, 0.4, 32));
}

TEST(SphereCenters, SeparationsShiftLaterSpheres) {
  const std::vector<double> sigma{0.1, 0.3};
  const auto c = sphere_centers(-2.0, 3, sigma);
  EXPECT_DOUBLE_EQ(c[0], -2.0);
  EXPECT_DOUBLE_EQ(c[1], 0.1);
  EXPECT_DOUBLE_EQ(c[2], 2.4);
  EXPECT_THROW(sphere_centers(0.0, 3, std::vector<double>{0.1}), Error);
}

TEST(BalancedCenter, RotatingDrop) {
  for (int K : {2, 3, 5}) {
    const BalancedCenter b = find_balanced_s(PMCFunction::rotating_drop(-1), K, -10, 10);
    EXPECT_NEAR(b.s0, -(K - 1.0), 1e-8);
    EXPECT_NEAR(std::abs(b.dsum), 8.0 * pi * K / 3.0, 1e-4);
  }
}

TEST(BalancedCenter, ConstantHasNoRoot) {
  try {
    find_balanced_s(PMCFunction::expression("1"), 3, -3, -1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoRoot);
  }
  EXPECT_THROW(find_balanced_s(PMCFunction::rotating_drop(1), 3, 1, -1), Error);
}
