#pragma once

// Approximate solutions: unit spheres bent by Green's-function graphs, joined
// by truncated catenoidal necks through smooth cutoffs on annuli.
//
// Orientation conventions follow profile.hpp: every profile runs from the
// leftmost pole to the rightmost one, N = (-drho, dx0) points outward, and on a
// sphere theta is the angle from its left pole, so x0 = c - cos(theta).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "pmc/error.hpp"
#include "pmc/green.hpp"
#include "pmc/moments.hpp"
#include "pmc/numerics.hpp"
#include "pmc/profile.hpp"

namespace pmc {

struct Configuration {
  int K = 1;
  double s = 0.0;
  std::vector<double> sigma;
  std::vector<double> delta;
  double r = 0.1;
  // the derived neck scales must satisfy max eps_k <= eps_bound_c * r^2
  double eps_bound_c = 100.0;

  void validate() const {
    if (K < 1) fail(ErrorKind::InvalidArgument, "K must be at least 1");
    if (static_cast<int>(sigma.size()) != K - 1 || static_cast<int>(delta.size()) != K - 1)
      fail(ErrorKind::InvalidArgument, "sigma and delta must have K - 1 entries");
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "r must be positive");
    for (double x : sigma)
      if (!(x > 0.0)) fail(ErrorKind::InvalidArgument, "separations must be positive when gluing necks");
  }
};

enum class Side { Left, Right };

/// Normalisation of the sphere Jacobi field J = n_J <e0, N>.
inline const double jacobi_normalization = std::sqrt(3.0 / (4.0 * pi));

/// A point of a parametrised profile with first and second derivatives with
/// respect to the parameter.
struct SpherePoint {
  double x0, rho, dx0, drho, d2x0, d2rho;
};

/// A profile locally written as x0 = x(rho).
struct GraphValue {
  double x, dx, ddx;
};

/// Unit sphere centred at (center, 0, 0) displaced along its outward normal by
///   f(theta) = -2 pi (eps_plus G(pi - theta) + eps_minus G(theta)),
/// so that near a pole with strength e the graph behaves like -e log(distance),
/// the same logarithm as a catenoid end of waist radius e.
struct SphereGraph {
  int k = 1;
  double center = 0.0;
  double eps_plus = 0.0;   // right pole (theta = pi)
  double eps_minus = 0.0;  // left pole (theta = 0)
  double A = 0.0;          // coefficient of the normalised Jacobi field in (Delta + 2) f
  std::vector<double> coeffs;
  double rho_plus = 0.0;   // truncation radius at the right pole, 0 when the cap is kept
  double rho_minus = 0.0;

  double f(double theta) const {
    double v = 0.0;
    if (eps_plus > 0.0) v += eps_plus * green_closed(pi - theta);
    if (eps_minus > 0.0) v += eps_minus * green_closed(theta);
    return -2.0 * pi * v;
  }

  double df(double theta) const {
    double v = 0.0;
    if (eps_plus > 0.0) v -= eps_plus * green_closed_derivative(pi - theta);
    if (eps_minus > 0.0) v += eps_minus * green_closed_derivative(theta);
    return -2.0 * pi * v;
  }

  double ddf(double theta) const {
    double v = 0.0;
    if (eps_plus > 0.0) v += eps_plus * green_closed_second_derivative(pi - theta);
    if (eps_minus > 0.0) v += eps_minus * green_closed_second_derivative(theta);
    return -2.0 * pi * v;
  }

  SpherePoint point(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double g = 1.0 + f(theta), dg = df(theta), ddg = ddf(theta);
    return {center - g * c,           g * s,
            -dg * c + g * s,          dg * s + g * c,
            -ddg * c + 2 * dg * s + g * c, ddg * s + 2 * dg * c - g * s};
  }

  /// Polar angle at which the graph reaches cylindrical radius rho near a pole.
  double theta_at(Side side, double rho) const {
    double phi = rho;
    for (int it = 0; it < 60; ++it) {
      const double theta = side == Side::Left ? phi : pi - phi;
      const double g = 1.0 + f(theta);
      const double dg = side == Side::Left ? df(theta) : -df(theta);
      const double res = g * std::sin(phi) - rho;
      const double step = res / (dg * std::sin(phi) + g * std::cos(phi));
      phi -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, phi)) break;
    }
    if (!(phi > 0.0 && phi < 0.5 * pi)) fail(ErrorKind::FitFailure, "sphere graph is not a graph near its pole");
    return side == Side::Left ? phi : pi - phi;
  }

  /// The graph near a pole as x0(rho).
  GraphValue graph(Side side, double rho) const {
    const SpherePoint p = point(theta_at(side, rho));
    const double r1 = p.drho;
    return {p.x0, p.dx0 / r1, (p.d2x0 * r1 - p.dx0 * p.d2rho) / (r1 * r1 * r1)};
  }

  double theta_begin() const { return rho_minus > 0.0 ? theta_at(Side::Left, rho_minus) : 0.0; }
  double theta_end() const { return rho_plus > 0.0 ? theta_at(Side::Right, rho_plus) : pi; }
};

/// One piece of a profile given by a parametrisation and its sample parameters.
struct Segment {
  std::function<SpherePoint(double)> fn;
  std::vector<double> q;
};

namespace detail {

/// Parameters on [a, b] graded towards the poles at 0 and pi with length
/// scales la, lb (0 disables grading on that side): equispaced in
/// theta + asinh(theta / la) - asinh((pi - theta) / lb).
inline std::vector<double> graded_grid(double a, double b, int n, double la, double lb) {
  auto phi = [&](double x) {
    double v = x;
    if (la > 0.0) v += std::asinh(x / la);
    if (lb > 0.0) v -= std::asinh((pi - x) / lb);
    return v;
  };
  const double pa = phi(a), pb = phi(b);
  std::vector<double> q(n);
  q.front() = a;
  q.back() = b;
  for (int i = 1; i + 1 < n; ++i) {
    const double target = pa + (pb - pa) * i / (n - 1);
    double lo = a, hi = b;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
      const double m = 0.5 * (lo + hi);
      if (m <= lo || m >= hi) break;
      (phi(m) < target ? lo : hi) = m;
    }
    q[i] = 0.5 * (lo + hi);
  }
  return q;
}

inline std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = a + (b - a) * i / (n - 1);
  q.front() = a;
  q.back() = b;
  return q;
}

/// Concatenates segments whose end points coincide; arc length by Gauss
/// quadrature of the parametrisation speed. `owner` receives the index of the
/// segment each sample belongs to.
inline ProfileCurve build_profile(const std::vector<Segment>& segs, bool front_pole, bool back_pole,
                                  std::vector<int>* owner) {
  static const QuadratureRule q8 = gauss_legendre(8);
  std::vector<ProfileSample> out;
  double t = 0.0;
  for (std::size_t si = 0; si < segs.size(); ++si) {
    const Segment& seg = segs[si];
    for (std::size_t j = 0; j < seg.q.size(); ++j) {
      if (j > 0) {
        const double a = seg.q[j - 1], b = seg.q[j];
        double len = 0.0;
        for (std::size_t m = 0; m < q8.nodes.size(); ++m) {
          const SpherePoint p = seg.fn(0.5 * (a + b) + 0.5 * (b - a) * q8.nodes[m]);
          len += q8.weights[m] * std::hypot(p.dx0, p.drho);
        }
        t += 0.5 * std::abs(b - a) * len;
      } else if (si > 0) {
        continue;  // shared with the previous segment's last sample
      }
      const SpherePoint p = seg.fn(seg.q[j]);
      const double speed = std::hypot(p.dx0, p.drho);
      ProfileSample s;
      s.t = t;
      s.x0 = p.x0;
      s.rho = std::max(0.0, p.rho);
      s.dx0 = p.dx0 / speed;
      s.drho = p.drho / speed;
      s.k1 = (p.drho * p.d2x0 - p.dx0 * p.d2rho) / (speed * speed * speed);
      out.push_back(s);
      if (owner) owner->push_back(static_cast<int>(si));
    }
  }
  if (front_pole) out.front().rho = 0.0;
  if (back_pole) out.back().rho = 0.0;
  return ProfileCurve(std::move(out), AnalyticTag{}, front_pole, back_pole);
}

}  // namespace detail

inline SphereGraph make_sphere_graph(int k, double center_s, double eps_plus, double eps_minus, int l_max) {
  if (eps_plus < 0.0 || eps_minus < 0.0) fail(ErrorKind::InvalidArgument, "source strengths must be non-negative");
  if (eps_plus > 0.1 || eps_minus > 0.1) fail(ErrorKind::InvalidArgument, "source strengths must not exceed 0.1");
  SphereGraph g;
  g.k = k;
  g.center = center_s;
  g.eps_plus = eps_plus;
  g.eps_minus = eps_minus;
  g.coeffs = green_function(l_max);
  g.A = 1.5 * (eps_plus - eps_minus) / jacobi_normalization;
  g.rho_plus = eps_plus > 0.0 ? std::pow(eps_plus, 0.75) : 0.0;
  g.rho_minus = eps_minus > 0.0 ? std::pow(eps_minus, 0.75) : 0.0;
  return g;
}

inline Segment sphere_segment(const SphereGraph& g, int n) {
  const double a = g.theta_begin(), b = g.theta_end();
  return {[g](double th) { return g.point(th); }, detail::graded_grid(a, b, n, 0.5 * g.rho_minus, 0.5 * g.rho_plus)};
}

/// Perturbed sphere truncated at radius eps^{3/4} around each pole carrying a
/// source. Without sources this is exactly sphere_profile(center_s, n).
inline std::pair<SphereGraph, ProfileCurve> perturbed_sphere(int k, double center_s, double eps_plus,
                                                             double eps_minus, int l_max, int n) {
  SphereGraph g = make_sphere_graph(k, center_s, eps_plus, eps_minus, l_max);
  if (n < 16) fail(ErrorKind::InvalidArgument, "perturbed_sphere needs n >= 16");
  if (eps_plus == 0.0 && eps_minus == 0.0) return {g, sphere_profile(center_s, n)};
  ProfileCurve c = detail::build_profile({sphere_segment(g, n)}, eps_minus == 0.0, eps_plus == 0.0, nullptr);
  return {g, c};
}

struct NeckSpec {
  int k = 1;
  double eps = 0.0;
  double p_flat = 0.0;
  double delta = 0.0;
  double rho_prime = 0.0;
  double sigma = 0.0;
  double mismatch = 0.0;

  double waist_center() const { return p_flat + delta; }
};

namespace detail {

struct MatchData {
  double xl, sl, xr, sr;  // left sphere graph and slope, right sphere graph and slope at rho'
};

inline MatchData match_data(const SphereGraph& left, const SphereGraph& right, double rho_prime) {
  const GraphValue l = left.graph(Side::Right, rho_prime);
  const GraphValue r = right.graph(Side::Left, rho_prime);
  return {l.x, l.dx, r.x, r.dx};
}

/// Summed squared mismatch of heights and (rho'-scaled) slopes between the
/// catenoid of waist eps centred at p and the two sphere graphs at rho'.
inline double neck_mismatch(const MatchData& m, double eps, double p) {
  const double rp = std::pow(eps, 0.75);
  const double a = eps * std::acosh(rp / eps);
  const double slope = eps / std::sqrt(rp * rp - eps * eps);
  const double hl = m.xl - (p - a), hr = m.xr - (p + a);
  const double dl = rp * (m.sl + slope), dr = rp * (m.sr - slope);
  return hl * hl + hr * hr + dl * dl + dr * dr;
}

// The mismatch is quadratic in p with this minimiser.
inline double best_p(const MatchData& m) { return 0.5 * (m.xl + m.xr); }

}  // namespace detail

/// Least-squares fit of a catenoid neck between two adjacent sphere graphs:
/// golden-section over log(eps), and for each eps over p in the gap.
inline NeckSpec fit_neck(const SphereGraph& left, const SphereGraph& right, double gap_center, double sigma_k) {
  if (!(sigma_k > 0.0)) fail(ErrorKind::InvalidArgument, "gap must be positive");
  const double lo_p = left.center, hi_p = right.center;
  if (!(gap_center > lo_p && gap_center < hi_p)) fail(ErrorKind::InvalidArgument, "gap center outside the gap");
  auto inner = [&](double eps, double* p_out) {
    const detail::MatchData m = detail::match_data(left, right, std::pow(eps, 0.75));
    auto [p, v] = golden_section([&](double p) { return detail::neck_mismatch(m, eps, p); }, lo_p, hi_p, 1e-12);
    const double pe = detail::best_p(m);
    const double ve = detail::neck_mismatch(m, eps, pe);
    if (ve <= v) p = pe, v = ve;
    if (p_out) *p_out = p;
    return v;
  };
  // the mismatch has spurious local minima in eps: bracket the best grid point first
  constexpr int scan = 241;
  const double la = std::log(1e-12), lb = std::log(0.0625);
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan; ++i) {
    const double v = inner(std::exp(la + (lb - la) * i / (scan - 1)), nullptr);
    if (v < best_v) best_v = v, best = i;
  }
  const double h = (lb - la) / (scan - 1);
  auto [leps, v] = golden_section([&](double le) { return inner(std::exp(le), nullptr); },
                                  la + h * std::max(0, best - 1), la + h * std::min(scan - 1, best + 1), 1e-12);
  NeckSpec n;
  n.k = left.k;
  n.eps = std::exp(leps);
  n.mismatch = inner(n.eps, &n.p_flat);
  n.rho_prime = std::pow(n.eps, 0.75);
  n.sigma = sigma_k;
  if (n.mismatch > 10.0 * std::pow(n.eps, 1.5))
    fail(ErrorKind::FitFailure, "neck mismatch " + std::to_string(n.mismatch) + " exceeds bound");
  return n;
}

namespace detail {

/// Separation of two tangent-ish unit spheres with sources of strength eps at
/// their facing poles for which the catenoid of waist eps matches best.
inline double canonical_lambda(double eps) {
  // left sphere centred at -1 - sigma/2, right at 1 + sigma/2, neck at 0 by symmetry;
  // sigma enters both heights linearly and the optimum zeroes them
  const SphereGraph left = make_sphere_graph(1, -1.0, eps, 0.0, 8);
  const double rp = std::pow(eps, 0.75);
  return 2.0 * (left.graph(Side::Right, rp).x + eps * std::acosh(rp / eps));
}

struct LambdaTable {
  std::vector<double> log_eps, log_sigma, slope;
};

inline const LambdaTable& lambda_table() {
  static LambdaTable table;
  static std::once_flag once;
  std::call_once(once, [] {
    constexpr int n = 48;
    const double a = std::log(1e-9), b = std::log(0.1);
    for (int i = 0; i < n; ++i) {
      const double le = a + (b - a) * i / (n - 1);
      const double sig = canonical_lambda(std::exp(le));
      if (!(sig > 0.0)) fail(ErrorKind::FitFailure, "canonical neck fit gives non-positive separation");
      table.log_eps.push_back(le);
      table.log_sigma.push_back(std::log(sig));
    }
    // Fritsch-Carlson monotone slopes
    const auto& x = table.log_eps;
    const auto& y = table.log_sigma;
    std::vector<double> d(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
      if (!(d[i] > 0.0)) fail(ErrorKind::FitFailure, "neck separation is not increasing in eps");
    }
    table.slope.assign(n, 0.0);
    table.slope[0] = d[0];
    table.slope[n - 1] = d[n - 2];
    for (int i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      table.slope[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  });
  return table;
}

inline double lambda_interp(double le) {
  const LambdaTable& t = lambda_table();
  const auto& x = t.log_eps;
  std::size_t i = std::upper_bound(x.begin(), x.end(), le) - x.begin();
  i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
  const double h = x[i + 1] - x[i], u = (le - x[i]) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * t.log_sigma[i] + (u3 - 2 * u2 + u) * h * t.slope[i] +
         (-2 * u3 + 3 * u2) * t.log_sigma[i + 1] + (u3 - u2) * h * t.slope[i + 1];
}

}  // namespace detail

/// Separation sigma = Lambda(eps) of the canonical neck fit, cached on a
/// log-spaced grid over [1e-9, 0.1].
inline double lambda_map(double eps) {
  if (eps == 0.0) return 0.0;
  const auto& t = detail::lambda_table();
  const double le = std::log(eps);
  if (!(eps > 0.0) || le < t.log_eps.front() - 1e-12 || le > t.log_eps.back() + 1e-12)
    fail(ErrorKind::OutOfRange, "eps outside the tabulated range [1e-9, 0.1]");
  return std::exp(detail::lambda_interp(le));
}

inline double lambda_invert(double sigma) {
  const auto& t = detail::lambda_table();
  if (!(sigma > 0.0)) fail(ErrorKind::OutOfRange, "separation must be positive");
  const double ls = std::log(sigma);
  if (ls < t.log_sigma.front() || ls > t.log_sigma.back())
    fail(ErrorKind::OutOfRange, "separation outside the image of Lambda");
  double lo = t.log_eps.front(), hi = t.log_eps.back();
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double m = 0.5 * (lo + hi);
    (detail::lambda_interp(m) < ls ? lo : hi) = m;
  }
  return std::exp(0.5 * (lo + hi));
}

struct Region {
  enum class Kind { Sphere, Transition, Neck } kind = Kind::Sphere;
  int k = 1;

  bool operator==(const Region&) const = default;
};

inline std::string region_name(const Region& r) {
  const char* n = r.kind == Region::Kind::Sphere ? "Sphere" : r.kind == Region::Kind::Neck ? "Neck" : "Transition";
  return std::string(n) + "(" + std::to_string(r.k) + ")";
}

/// Sample counts of the glued segments; fixing them makes the discrete
/// surface depend smoothly on the configuration.
struct GlueCounts {
  int n_sphere = 0;
  std::vector<int> n_transition;
  std::vector<int> n_neck;
};

struct GluedSurface {
  ProfileCurve profile;
  std::vector<Region> regions;
  // 1-based index of the sphere on whose side of the neighbouring necks each sample lies
  std::vector<int> side;
  GlueCounts counts;
  Configuration config;
  std::vector<NeckSpec> necks;
  std::vector<SphereGraph> graphs;
  std::vector<double> centers;
};

namespace detail {

/// Annulus rho in [rho'/2, rho'] on one side of a neck: the graph
/// x0 = chi s(rho) + (1 - chi) c(rho) with chi the smooth step in
/// (2/rho')(rho - rho'/2), sphere graph s, catenoid branch c.
inline Segment transition_segment(const SphereGraph& g, Side pole, const NeckSpec& nk, int n) {
  const double rp = nk.rho_prime, eps = nk.eps, pc = nk.waist_center();
  const double sign = pole == Side::Right ? -1.0 : 1.0;  // catenoid branch below / above the waist
  auto fn = [g, pole, rp, eps, pc, sign](double q) {
    const double rho = pole == Side::Right ? -q : q;
    const double y = (2.0 / rp) * (rho - 0.5 * rp);
    const double k = 2.0 / rp;
    const double chi = smooth_step(y), dchi = smooth_step_derivative(y) * k;
    const double ddchi = smooth_step_second_derivative(y) * k * k;
    const GraphValue gs = g.graph(pole, rho);
    const double w = rho * rho - eps * eps;
    const double xc = pc + sign * eps * std::acosh(rho / eps);
    const double sc = sign * eps / std::sqrt(w);
    const double cc = -sign * eps * rho / (w * std::sqrt(w));
    const double x = chi * gs.x + (1.0 - chi) * xc;
    const double dx = dchi * (gs.x - xc) + chi * gs.dx + (1.0 - chi) * sc;
    const double ddx = ddchi * (gs.x - xc) + 2.0 * dchi * (gs.dx - sc) + chi * gs.ddx + (1.0 - chi) * cc;
    const double dq = pole == Side::Right ? -1.0 : 1.0;
    return SpherePoint{x, rho, dx * dq, dq, ddx, 0.0};
  };
  std::vector<double> q = pole == Side::Right ? uniform_grid(-rp, -0.5 * rp, n) : uniform_grid(0.5 * rp, rp, n);
  return {fn, q};
}

/// True when two non-adjacent chords of the profile polyline cross. Profiles
/// monotone in x0 are accepted without the quadratic scan.
inline bool self_intersects(const ProfileCurve& c) {
  const std::size_t n = c.size();
  bool monotone = true;
  for (std::size_t i = 1; i < n && monotone; ++i) monotone = c[i].x0 > c[i - 1].x0;
  if (monotone) return false;
  auto orient = [](double ax, double ay, double bx, double by, double cx, double cy) {
    const double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return (v > 0.0) - (v < 0.0);
  };
  std::vector<double> lo(n - 1), hi(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lo[i] = std::min(c[i].x0, c[i + 1].x0);
    hi[i] = std::max(c[i].x0, c[i + 1].x0);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 2; j + 1 < n; ++j) {
      if (hi[j] < lo[i] || lo[j] > hi[i]) continue;
      const auto &a = c[i], &b = c[i + 1], &p = c[j], &q = c[j + 1];
      const int o1 = orient(a.x0, a.rho, b.x0, b.rho, p.x0, p.rho);
      const int o2 = orient(a.x0, a.rho, b.x0, b.rho, q.x0, q.rho);
      const int o3 = orient(p.x0, p.rho, q.x0, q.rho, a.x0, a.rho);
      const int o4 = orient(p.x0, p.rho, q.x0, q.rho, b.x0, b.rho);
      if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    }
  }
  return false;
}

inline Segment neck_segment(const NeckSpec& nk, int n) {
  const double eps = nk.eps, pc = nk.waist_center();
  const double umax = std::acosh(0.5 * nk.rho_prime / eps);
  auto fn = [eps, pc](double u) {
    return SpherePoint{pc + eps * u, eps * std::cosh(u), eps, eps * std::sinh(u), 0.0, eps * std::cosh(u)};
  };
  return {fn, uniform_grid(-umax, umax, n)};
}

}  // namespace detail

/// Assembles spheres, transitions and necks into one profile. `n` is the
/// sample count of each sphere body; unless `fixed` is given, neck and
/// transition counts follow from the neck scale so that spacing stays below
/// eps/64 within rho'.
inline GluedSurface glue(const Configuration& config, int l_max, int n, const GlueCounts* fixed = nullptr) {
  config.validate();
  if (n < 16) fail(ErrorKind::InvalidArgument, "glue needs n >= 16");
  GluedSurface out;
  out.config = config;
  const int K = config.K;
  out.centers = sphere_centers(config.s, K, config.sigma);
  if (K == 1) {
    out.graphs.push_back(make_sphere_graph(1, config.s, 0.0, 0.0, l_max));
    out.profile = sphere_profile(config.s, n);
    out.regions.assign(out.profile.size(), Region{Region::Kind::Sphere, 1});
    out.side.assign(out.profile.size(), 1);
    out.counts.n_sphere = n;
    return out;
  }

  std::vector<double> eps(K - 1);
  double eps_max = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    eps[k] = lambda_invert(config.sigma[k]);
    eps_max = std::max(eps_max, eps[k]);
  }
  if (eps_max > config.eps_bound_c * config.r * config.r)
    fail(ErrorKind::InvalidArgument, "neck scale exceeds the configured multiple of r^2");

  for (int k = 0; k < K; ++k)
    out.graphs.push_back(make_sphere_graph(k + 1, out.centers[k], k + 1 < K ? eps[k] : 0.0, k > 0 ? eps[k - 1] : 0.0,
                                           l_max));

  for (int k = 0; k < K - 1; ++k) {
    NeckSpec nk;
    nk.k = k + 1;
    nk.eps = eps[k];
    nk.rho_prime = std::pow(eps[k], 0.75);
    nk.delta = config.delta[k];
    nk.sigma = config.sigma[k];
    if (!(0.5 * nk.rho_prime > eps[k] * (1.0 + 1e-9)))
      fail(ErrorKind::EmbeddingFailure, "neck scale too large for its transition annulus");
    const detail::MatchData m = detail::match_data(out.graphs[k], out.graphs[k + 1], nk.rho_prime);
    nk.p_flat = detail::best_p(m);
    nk.mismatch = detail::neck_mismatch(m, nk.eps, nk.p_flat);
    if (!(nk.p_flat > out.centers[k] && nk.p_flat < out.centers[k + 1]))
      fail(ErrorKind::FitFailure, "neck center outside the gap");
    out.necks.push_back(nk);
  }

  if (fixed && (static_cast<int>(fixed->n_transition.size()) != K - 1 ||
                static_cast<int>(fixed->n_neck.size()) != K - 1))
    fail(ErrorKind::InvalidArgument, "fixed sample counts do not match K");
  out.counts.n_sphere = n;
  std::vector<Segment> segs;
  std::vector<Region> seg_region;
  for (int k = 0; k < K; ++k) {
    segs.push_back(sphere_segment(out.graphs[k], n));
    seg_region.push_back({Region::Kind::Sphere, k + 1});
    if (k + 1 == K) break;
    const NeckSpec& nk = out.necks[k];
    const double umax = std::acosh(0.5 * nk.rho_prime / nk.eps);
    const int n_tr = fixed ? fixed->n_transition[k]
                           : std::max(32, static_cast<int>(std::ceil(32.0 * nk.rho_prime / nk.eps)) + 1);
    const int n_neck = fixed ? fixed->n_neck[k] : std::max(n / 2, 2 * static_cast<int>(std::ceil(64.0 * umax)) + 1);
    if (n_tr < 4 || n_neck < 8) fail(ErrorKind::InvalidArgument, "too few samples on a neck");
    out.counts.n_transition.push_back(n_tr);
    out.counts.n_neck.push_back(n_neck);
    segs.push_back(detail::transition_segment(out.graphs[k], Side::Right, nk, n_tr));
    seg_region.push_back({Region::Kind::Transition, k + 1});
    segs.push_back(detail::neck_segment(nk, n_neck));
    seg_region.push_back({Region::Kind::Neck, k + 1});
    segs.push_back(detail::transition_segment(out.graphs[k + 1], Side::Left, nk, n_tr));
    seg_region.push_back({Region::Kind::Transition, k + 1});
  }
  std::vector<int> owner;
  out.profile = detail::build_profile(segs, true, true, &owner);
  for (std::size_t i = 0; i < owner.size(); ++i) {
    const Region reg = seg_region[owner[i]];
    out.regions.push_back(reg);
    int side = reg.k;
    if (reg.kind == Region::Kind::Neck) {
      if (out.profile[i].x0 > out.necks[reg.k - 1].waist_center()) side = reg.k + 1;
    } else if (reg.kind == Region::Kind::Transition && owner[i] > 0 && seg_region[owner[i] - 1].kind == Region::Kind::Neck) {
      side = reg.k + 1;
    }
    out.side.push_back(side);
  }

  for (std::size_t i = 0; i < out.profile.size(); ++i)
    if (out.profile[i].rho < 0.0) fail(ErrorKind::EmbeddingFailure, "assembled profile crosses the axis");
  if (detail::self_intersects(out.profile))
    fail(ErrorKind::EmbeddingFailure, "assembled profile self-intersects");
  return out;
}

}  // namespace pmc
