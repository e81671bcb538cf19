#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pmc/pmc_function.hpp"

using namespace pmc;

namespace {

Vec3 rotate(const Vec3& v, double a) {
  return {v[0], std::cos(a) * v[1] - std::sin(a) * v[2], std::sin(a) * v[1] + std::cos(a) * v[2]};
}

}  // namespace

TEST(Parse, SinglePower) {
  const PMCExpr e = parse_pmc("p0^2");
  EXPECT_TRUE(e == PMCExpr(bin(BinOp::Pow, var(Var::P0), lit(2))));
}

TEST(Parse, NestedNegationMatchesHandBuiltTree) {
  const PMCExpr ref(
      neg(bin(BinOp::Mul, var(Var::N0), call(Func::Exp, neg(bin(BinOp::Pow, var(Var::Rho), lit(2)))))));
  EXPECT_TRUE(parse_pmc("-(N0*exp(-rho^2))") == ref);
  EXPECT_FALSE(parse_pmc("-(N0*exp(rho^2))") == ref);
}

TEST(Parse, PowerIsRightAssociative) {
  const PMCExpr e = parse_pmc("p0^2^3");
  EXPECT_TRUE(e == PMCExpr(bin(BinOp::Pow, var(Var::P0), bin(BinOp::Pow, lit(2), lit(3)))));
}

TEST(Parse, UnbalancedParenReportsOffset) {
  try {
    parse_pmc("(p0");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(Parse, RejectsUnknownIdentifierAndDanglingOperator) {
  EXPECT_THROW(parse_pmc("x1 + 1"), SyntaxError);
  EXPECT_THROW(parse_pmc("p0 +"), SyntaxError);
  EXPECT_THROW(parse_pmc(""), SyntaxError);
}

TEST(Parse, PrintedFormReparsesToSameTree) {
  for (const char* src : {"p0^2", "-(N0*exp(-rho^2))", "sin(p0)/(1 + rho^2) - Nrho", "sqrt(abs(p0 - 2*rho))"}) {
    const PMCExpr e = parse_pmc(src);
    EXPECT_TRUE(parse_pmc(e.to_string()) == e) << src;
  }
}

TEST(Evaluate, RotatingDrop) {
  const auto F = PMCFunction::rotating_drop(1);
  EXPECT_DOUBLE_EQ(F(Vec3(3, 0, 0), Vec3(0, 1, 0)), 9.0);
  EXPECT_DOUBLE_EQ(F(Vec3(3, 0, 0), Vec3(1, 0, 0)), 9.0);
  EXPECT_DOUBLE_EQ(PMCFunction::rotating_drop(-2)(Vec3(1.5, 0.3, 0), Vec3(0, 0, 1)), -4.5);
}

TEST(Evaluate, InvariantUnderAxialRotation) {
  const auto F = PMCFunction::expression("p0^2");
  const auto G = PMCFunction::expression("p0*Nrho + rho^2*N0 - exp(-rho)");
  const Vec3 p(1, 0.6, 0.8), n(0, 0.6, 0.8);
  for (double a : {0.3, 1.0, 2.5, -4.0}) {
    EXPECT_NEAR(F(rotate(p, a), rotate(n, a)), F(p, n), 1e-15);
    EXPECT_NEAR(G(rotate(p, a), rotate(n, a)), G(p, n), 1e-15);
  }
}

TEST(Evaluate, ChargedFilmWithLinearPotential) {
  const auto F = PMCFunction::charged_film(1, "p0");
  std::mt19937 gen(7);
  std::normal_distribution<double> d;
  for (int i = 0; i < 20; ++i) {
    const Vec3 p(d(gen), d(gen), d(gen));
    const Vec3 n = Vec3(d(gen), d(gen), d(gen)).normalized();
    EXPECT_NEAR(F(p, n), -n[0], 1e-9);
  }
}

TEST(Evaluate, ChargedFilmRejectsNormalDependentPotential) {
  EXPECT_THROW(PMCFunction::charged_film(1, "N0"), Error);
}

TEST(Evaluate, DomainErrors) {
  const Vec3 p(-1, 0, 0), n(1, 0, 0);
  EXPECT_THROW(PMCFunction::expression("log(p0)")(p, n), Error);
  EXPECT_THROW(PMCFunction::expression("sqrt(p0)")(p, n), Error);
  EXPECT_THROW(PMCFunction::expression("1/(p0 + 1)")(p, n), Error);
}

TEST(Evaluate, RejectsNonUnitNormal) {
  EXPECT_THROW(PMCFunction::rotating_drop(1)(Vec3(1, 0, 0), Vec3(2, 0, 0)), Error);
}

TEST(Evaluate, ZeroDetection) {
  EXPECT_TRUE(PMCFunction::zero().is_zero());
  EXPECT_TRUE(PMCFunction::rotating_drop(0).is_zero());
  EXPECT_FALSE(PMCFunction::expression("1").is_zero());
}

TEST(Derivatives, SquareOfAxialCoordinate) {
  const auto d = PMCFunction::expression("p0^2").derivatives(Vec3(3, 0, 0), Vec3(0, 1, 0));
  EXPECT_NEAR(d.d1[0], 6.0, 1e-8);
  EXPECT_NEAR(d.d1[1], 0.0, 1e-8);
  EXPECT_NEAR(d.d1[2], 0.0, 1e-8);
  EXPECT_NEAR(d.d2.norm(), 0.0, 1e-12);
}

TEST(Derivatives, ConstantVanishes) {
  const auto d = PMCFunction::expression("1").derivatives(Vec3(0.2, 0.4, -1), Vec3(0, 0, 1));
  EXPECT_EQ(d.d1.norm(), 0.0);
  EXPECT_EQ(d.d2.norm(), 0.0);
}

TEST(Derivatives, BilinearMatchesAnalyticGradient) {
  const auto F = PMCFunction::expression("N0*p0");
  std::mt19937 gen(11);
  std::normal_distribution<double> d;
  for (int i = 0; i < 20; ++i) {
    const Vec3 p(d(gen), d(gen), d(gen));
    const Vec3 n = Vec3(d(gen), d(gen), d(gen)).normalized();
    const auto g = F.derivatives(p, n);
    EXPECT_NEAR((g.d1 - Vec3(n[0], 0, 0)).norm(), 0.0, 1e-8);
    EXPECT_NEAR((g.d2 - Vec3(p[0], 0, 0)).norm(), 0.0, 1e-8);
  }
}

TEST(Evaluate, Deterministic) {
  const auto F = PMCFunction::expression("sin(p0)*exp(-rho^2) + Nrho/3");
  const Vec3 p(0.7, -0.2, 0.5), n = Vec3(0.1, 0.9, -0.3).normalized();
  EXPECT_EQ(F(p, n), F(p, n));
}
