#pragma once

// F-moments of unit spheres on the x0-axis and the balanced centre search.
//
// The moment of a closed surface S is the integral of F(x, N) <e0, N> over S
// with N the outward normal. Flipping the orientation negates every moment,
// leaves the balanced centre unchanged and negates its derivative.

#include <cmath>
#include <span>
#include <vector>

#include "pmc/error.hpp"
#include "pmc/numerics.hpp"
#include "pmc/pmc_function.hpp"
#include "pmc/profile.hpp"

namespace pmc {

struct MomentVector {
  std::vector<double> mu;
  double s = 0;
  std::vector<double> sigma;
  int quad_order = 0;

  double total() const { return pairwise_sum(mu); }
};

namespace detail {

inline double sphere_moment_raw(const PMCFunction& F, double center_s, const QuadratureRule& q) {
  std::vector<double> terms(q.nodes.size());
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double u = q.nodes[i];
    const double w = std::sqrt(std::max(0.0, 1.0 - u * u));
    InvariantArgs a;
    a.p0 = center_s + u;
    a.rho = w;
    a.n0 = u;
    a.nrho = w;
    terms[i] = q.weights[i] * F.eval(a) * u;
  }
  return 2.0 * pi * pairwise_sum(terms);
}

}  // namespace detail

/// Gauss-Legendre quadrature in u = cos(theta) over the unit sphere centred
/// at (center_s, 0, 0). Throws QuadratureNonconvergence if doubling the order
/// moves the value by more than 1e-8.
inline double f_moment(const PMCFunction& F, double center_s, int quad_order) {
  if (quad_order < 4) fail(ErrorKind::InvalidArgument, "quad_order must be at least 4");
  const double v = detail::sphere_moment_raw(F, center_s, gauss_legendre(quad_order));
  const double v2 = detail::sphere_moment_raw(F, center_s, gauss_legendre(2 * quad_order));
  if (!(std::abs(v2 - v) <= 1e-8 * std::max(1.0, std::abs(v2))))
    fail(ErrorKind::QuadratureNonconvergence, "sphere moment changes by " + std::to_string(std::abs(v2 - v)));
  return v;
}

/// Moment over the revolution surface of an arbitrary profile, integrated
/// panel by panel with Gauss-Legendre nodes. Tagged curves are evaluated on
/// their closed form; others on the cubic Hermite interpolant of the samples.
/// Open curves give the boundary-truncated integral.
inline double f_moment_general(const PMCFunction& F, const ProfileCurve& curve, int quad_order) {
  if (quad_order < 1) fail(ErrorKind::InvalidArgument, "quad_order must be positive");
  const QuadratureRule q = gauss_legendre(quad_order);
  const auto& tag = curve.tag();
  std::vector<double> panels;
  panels.reserve(curve.size());
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto& a = curve[i];
    const auto& b = curve[i + 1];
    const double h = b.t - a.t;
    double acc = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double x = 0.5 * (q.nodes[k] + 1.0);
      double p0, rho, d0, dr;
      if (tag.sphere) {
        const double t = a.t + x * h;
        p0 = tag.sphere->center - std::cos(t);
        rho = std::sin(t);
        d0 = std::sin(t);
        dr = std::cos(t);
      } else if (tag.catenoid) {
        const double eps = tag.catenoid->eps;
        const double ua = (a.x0 - tag.catenoid->center) / eps;
        const double sa = std::sinh(ua);
        const double u = std::asinh(sa + x * h / eps);
        p0 = tag.catenoid->center + eps * u;
        rho = eps * std::cosh(u);
        d0 = 1.0 / std::cosh(u);
        dr = std::tanh(u);
      } else {
        const double x2 = x * x, x3 = x2 * x;
        const double h00 = 2 * x3 - 3 * x2 + 1, h10 = x3 - 2 * x2 + x;
        const double h01 = -2 * x3 + 3 * x2, h11 = x3 - x2;
        const double g00 = 6 * x2 - 6 * x, g10 = 3 * x2 - 4 * x + 1;
        const double g01 = -6 * x2 + 6 * x, g11 = 3 * x2 - 2 * x;
        p0 = h00 * a.x0 + h10 * h * a.dx0 + h01 * b.x0 + h11 * h * b.dx0;
        rho = h00 * a.rho + h10 * h * a.drho + h01 * b.rho + h11 * h * b.drho;
        d0 = (g00 * a.x0 + g10 * h * a.dx0 + g01 * b.x0 + g11 * h * b.dx0) / h;
        dr = (g00 * a.rho + g10 * h * a.drho + g01 * b.rho + g11 * h * b.drho) / h;
      }
      const double speed = std::hypot(d0, dr);
      InvariantArgs p;
      p.p0 = p0;
      p.rho = rho;
      p.n0 = -dr / speed;
      p.nrho = d0 / speed;
      acc += 0.5 * h * q.weights[k] * F.eval(p) * p.n0 * 2.0 * pi * rho * speed;
    }
    panels.push_back(acc);
  }
  return pairwise_sum(panels);
}

inline std::vector<double> sphere_centers(double s, int K, std::span<const double> sigma) {
  if (K < 1) fail(ErrorKind::InvalidArgument, "K must be at least 1");
  if (static_cast<int>(sigma.size()) != K - 1) fail(ErrorKind::InvalidArgument, "sigma must have K - 1 entries");
  std::vector<double> c(K);
  double shift = 0.0;
  for (int k = 0; k < K; ++k) {
    if (k > 0) shift += sigma[k - 1];
    c[k] = s + 2.0 * k + shift;
  }
  return c;
}

inline MomentVector moment_sum(const PMCFunction& F, double s, int K, std::span<const double> sigma,
                               int quad_order = 32) {
  for (double x : sigma)
    if (x < 0.0) fail(ErrorKind::InvalidArgument, "separations must be non-negative");
  MomentVector m;
  m.s = s;
  m.sigma.assign(sigma.begin(), sigma.end());
  m.quad_order = quad_order;
  for (double c : sphere_centers(s, K, sigma)) m.mu.push_back(f_moment(F, c, quad_order));
  return m;
}

struct BalancedCenter {
  double s0 = 0;
  double dsum = 0;
};

/// Root of s -> sum_k mu_F(S_k(s)) for tangent spheres (all separations zero).
inline BalancedCenter find_balanced_s(const PMCFunction& F, int K, double lo, double hi, int quad_order = 32) {
  if (!(lo < hi)) fail(ErrorKind::InvalidArgument, "bracket must satisfy lo < hi");
  const std::vector<double> zero_sigma(K > 0 ? K - 1 : 0, 0.0);
  auto total = [&](double s) { return moment_sum(F, s, K, zero_sigma, quad_order).total(); };

  double a = lo, b = hi;
  double fa = total(a), fb = total(b);
  constexpr double flat = 1e-12;
  if (!(fa * fb < 0.0)) {
    // scan for a sign change
    constexpr int scan = 64;
    bool found = false;
    double prev_s = lo, prev_v = fa;
    double largest = std::abs(fa);
    for (int i = 1; i < scan && !found; ++i) {
      const double s = lo + (hi - lo) * i / (scan - 1);
      const double v = total(s);
      largest = std::max(largest, std::abs(v));
      if (prev_v * v < 0.0 && std::max(std::abs(prev_v), std::abs(v)) > flat) {
        a = prev_s, fa = prev_v, b = s, fb = v;
        found = true;
      }
      prev_s = s, prev_v = v;
    }
    if (!found) {
      if (largest <= flat) fail(ErrorKind::NoRoot, "no balanced center in bracket (moment sum vanishes identically)");
      fail(ErrorKind::NoRoot, "no balanced center in bracket");
    }
  }
  if (std::max(std::abs(fa), std::abs(fb)) <= flat)
    fail(ErrorKind::NoRoot, "no balanced center in bracket (moment sum vanishes identically)");

  while (b - a > 1e-8) {
    const double m = 0.5 * (a + b);
    const double fm = total(m);
    if (fm == 0.0) {
      a = b = m;
      break;
    }
    if (fa * fm < 0.0) b = m, fb = fm;
    else a = m, fa = fm;
  }
  double s = 0.5 * (a + b);
  constexpr double h = 1e-5;
  auto derivative = [&](double x) { return (total(x + h) - total(x - h)) / (2 * h); };
  for (int it = 0; it < 5; ++it) {
    const double v = total(s);
    if (std::abs(v) <= 1e-10) break;
    const double d = derivative(s);
    if (d == 0.0) break;
    s -= v / d;
  }
  BalancedCenter r{s, derivative(s)};
  if (std::abs(r.dsum) < 1e-6) fail(ErrorKind::DegenerateRoot, "moment sum has vanishing derivative at its root");
  return r;
}

}  // namespace pmc
