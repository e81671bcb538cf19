#pragma once

// Profile curves of axially symmetric surfaces in the (x0, rho) half-plane.
//
// Orientation: curves run with the outward unit normal N = (-drho, dx0) on
// the left, so a sphere profile goes from its left pole (x0 = c - 1) to its
// right pole. Curvatures are measured against the inward normal, which gives
// H = 2 on the unit sphere.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pmc/error.hpp"
#include "pmc/numerics.hpp"

namespace pmc {

struct ProfileSample {
  double t = 0;     // arc length
  double x0 = 0;    // axial coordinate
  double rho = 0;   // distance to the axis
  double dx0 = 0;   // d x0 / dt
  double drho = 0;  // d rho / dt
  // meridian curvature when known in closed form, NaN otherwise
  double k1 = std::numeric_limits<double>::quiet_NaN();

  bool has_k1() const { return !std::isnan(k1); }
};

struct SphereTag {
  double center;
};

struct CatenoidTag {
  double eps;
  double center;
};

struct AnalyticTag {
  std::optional<SphereTag> sphere;
  std::optional<CatenoidTag> catenoid;
  bool any() const { return sphere.has_value() || catenoid.has_value(); }
};

struct Curvatures {
  double k1 = 0;  // meridian curvature
  double k2 = 0;  // parallel curvature
  double mean() const { return k1 + k2; }
  double norm_sq() const { return k1 * k1 + k2 * k2; }
};

class ProfileCurve {
 public:
  ProfileCurve() = default;
  ProfileCurve(std::vector<ProfileSample> samples, AnalyticTag tag, bool front_pole, bool back_pole)
      : samples_(std::move(samples)), tag_(tag), front_pole_(front_pole), back_pole_(back_pole) {}

  std::span<const ProfileSample> samples() const { return samples_; }
  const ProfileSample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  const AnalyticTag& tag() const { return tag_; }
  bool front_pole() const { return front_pole_; }
  bool back_pole() const { return back_pole_; }

  bool is_pole(std::size_t i) const {
    return (i == 0 && front_pole_) || (i + 1 == samples_.size() && back_pole_);
  }

  /// Same samples with the closed-form identity dropped, forcing the
  /// finite-difference curvature path.
  ProfileCurve untagged() const {
    std::vector<ProfileSample> s = samples_;
    for (auto& x : s) x.k1 = std::numeric_limits<double>::quiet_NaN();
    return ProfileCurve(std::move(s), AnalyticTag{}, front_pole_, back_pole_);
  }

  /// Largest violation of dx0^2 + drho^2 = 1.
  double arc_length_defect() const {
    double worst = 0.0;
    for (const auto& s : samples_) worst = std::max(worst, std::abs(s.dx0 * s.dx0 + s.drho * s.drho - 1.0));
    return worst;
  }

  /// Second derivatives (d2x0, d2rho) of the arc-length parametrisation.
  std::pair<double, double> second_derivatives(std::size_t i) const;

  Curvatures curvatures(std::size_t i) const;

 private:
  std::vector<ProfileSample> samples_;
  AnalyticTag tag_;
  bool front_pole_ = false;
  bool back_pole_ = false;
};

namespace detail {

// Three-point derivative on a non-uniform grid, second order at interior points.
inline double fd_weights_central(double h1, double h2, double fm, double f0, double fp) {
  return (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 + (h1 / (h2 * (h1 + h2))) * fp;
}

// One-sided three-point derivative at the first node of (x0 < x1 < x2).
inline double fd_weights_forward(double h1, double h2, double f0, double f1, double f2) {
  return (-(2 * h1 + h2) / (h1 * (h1 + h2))) * f0 + ((h1 + h2) / (h1 * h2)) * f1 - (h1 / (h2 * (h1 + h2))) * f2;
}

// First-derivative weights at z for nodes x[0..m) (Fornberg's recursion).
template <std::size_t M>
inline std::array<double, M> fd_weights(double z, const std::array<double, M>& x) {
  std::array<std::array<double, 2>, M> c{};
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < M; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, M> w{};
  for (std::size_t i = 0; i < M; ++i) w[i] = c[i][1];
  return w;
}

}  // namespace detail

inline std::pair<double, double> ProfileCurve::second_derivatives(std::size_t i) const {
  const auto& s = samples_[i];
  if (tag_.any() || s.has_k1()) {
    const double k1 = curvatures(i).k1;
    // T' = -k1 N with N = (-drho, dx0)
    return {k1 * s.drho, -k1 * s.dx0};
  }
  const std::size_t n = samples_.size();
  if (n < 3) fail(ErrorKind::InvalidArgument, "profile needs at least three samples");
  if (i == 0) {
    const auto& a = samples_[1];
    const auto& b = samples_[2];
    if (front_pole_) {
      // mirror image through the axis: ghost tangent (-dx0, drho)
      const double h = a.t - s.t;
      return {(a.dx0 + a.dx0) / (2 * h), 0.0};
    }
    const double h1 = a.t - s.t, h2 = b.t - a.t;
    return {detail::fd_weights_forward(h1, h2, s.dx0, a.dx0, b.dx0),
            detail::fd_weights_forward(h1, h2, s.drho, a.drho, b.drho)};
  }
  if (i + 1 == n) {
    const auto& a = samples_[n - 2];
    const auto& b = samples_[n - 3];
    if (back_pole_) {
      const double h = s.t - a.t;
      return {(-a.dx0 - a.dx0) / (2 * h), 0.0};
    }
    const double h1 = s.t - a.t, h2 = a.t - b.t;
    return {-detail::fd_weights_forward(h1, h2, s.dx0, a.dx0, b.dx0),
            -detail::fd_weights_forward(h1, h2, s.drho, a.drho, b.drho)};
  }
  if (i >= 2 && i + 2 < n && !is_pole(i - 2) && !is_pole(i + 2)) {
    // five-point stencil, fourth order
    std::array<double, 5> t{};
    for (std::size_t k = 0; k < 5; ++k) t[k] = samples_[i + k - 2].t;
    const auto w = detail::fd_weights(s.t, t);
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < 5; ++k) a += w[k] * samples_[i + k - 2].dx0, b += w[k] * samples_[i + k - 2].drho;
    return {a, b};
  }
  const auto& m = samples_[i - 1];
  const auto& p = samples_[i + 1];
  const double h1 = s.t - m.t, h2 = p.t - s.t;
  return {detail::fd_weights_central(h1, h2, m.dx0, s.dx0, p.dx0),
          detail::fd_weights_central(h1, h2, m.drho, s.drho, p.drho)};
}

inline Curvatures ProfileCurve::curvatures(std::size_t i) const {
  const auto& s = samples_[i];
  Curvatures c;
  if (tag_.sphere) {
    c.k1 = 1.0;
    c.k2 = s.rho > 1e-12 ? s.dx0 / s.rho : 1.0;
    return c;
  }
  if (tag_.catenoid) {
    const double eps = tag_.catenoid->eps;
    const double ch = std::cosh((s.x0 - tag_.catenoid->center) / eps);
    c.k1 = -1.0 / (eps * ch * ch);
    c.k2 = s.dx0 / s.rho;
    return c;
  }
  if (s.has_k1()) {
    c.k1 = s.k1;
  } else {
    const auto [d2x0, d2rho] = second_derivatives(i);
    c.k1 = s.drho * d2x0 - s.dx0 * d2rho;
  }
  if (s.rho < 1e-12) {
    if (!is_pole(i)) fail(ErrorKind::PoleSingularity, "curvature requested on the axis away from a pole");
    c.k2 = c.k1;
  } else {
    c.k2 = s.dx0 / s.rho;
  }
  return c;
}

inline double mean_curvature(const ProfileCurve& curve, std::size_t at) { return curve.curvatures(at).mean(); }

inline double second_fundamental_norm_sq(const ProfileCurve& curve, std::size_t at) {
  return curve.curvatures(at).norm_sq();
}

/// Unit semicircle x0 = c - cos t, rho = sin t, t in [0, pi], n + 1 samples.
inline ProfileCurve sphere_profile(double center_s, int n) {
  if (n < 16) fail(ErrorKind::InvalidArgument, "sphere_profile needs n >= 16");
  std::vector<ProfileSample> s(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = pi * i / n;
    s[i] = {t, center_s - std::cos(t), std::sin(t), std::sin(t), std::cos(t)};
  }
  s.front().rho = 0.0;
  s.back().rho = 0.0;
  s.front().dx0 = s.back().dx0 = 0.0;
  s.front().drho = 1.0;
  s.back().drho = -1.0;
  s[n / 2].x0 = n % 2 == 0 ? center_s : s[n / 2].x0;
  AnalyticTag tag;
  tag.sphere = SphereTag{center_s};
  return ProfileCurve(std::move(s), tag, true, true);
}

inline double catenoid_radius(double eps, double center_x0, double x0) {
  return eps * std::cosh((x0 - center_x0) / eps);
}

/// rho = eps cosh((x0 - c)/eps) on [c - w, c + w], samples equispaced in the
/// catenoid parameter u = (x0 - c)/eps and labelled by arc length.
inline ProfileCurve catenoid_profile(double eps, double center_x0, double half_width, int n) {
  if (!(eps > 0.0) || !(half_width > 0.0)) fail(ErrorKind::InvalidArgument, "catenoid needs eps > 0 and half_width > 0");
  if (half_width / eps > 700.0) fail(ErrorKind::Overflow, "half_width / eps exceeds 700");
  if (n < 2) fail(ErrorKind::InvalidArgument, "catenoid needs n >= 2");
  const double umax = half_width / eps;
  std::vector<ProfileSample> s(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double u = -umax + 2.0 * umax * i / n;
    const double uu = (2 * i == n) ? 0.0 : u;
    s[i].t = eps * (std::sinh(uu) + std::sinh(umax));
    s[i].x0 = center_x0 + eps * uu;
    s[i].rho = eps * std::cosh(uu);
    s[i].dx0 = 1.0 / std::cosh(uu);
    s[i].drho = std::tanh(uu);
  }
  AnalyticTag tag;
  tag.catenoid = CatenoidTag{eps, center_x0};
  return ProfileCurve(std::move(s), tag, false, false);
}

/// d f / dt at every sample, second-order differences on the arc-length grid;
/// zero at designated poles where f is even.
inline std::vector<double> profile_derivative(const ProfileCurve& curve, std::span<const double> f) {
  const std::size_t n = curve.size();
  std::vector<double> df(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (curve.is_pole(i)) continue;
    if (i == 0) {
      df[i] = detail::fd_weights_forward(curve[1].t - curve[0].t, curve[2].t - curve[1].t, f[0], f[1], f[2]);
    } else if (i + 1 == n) {
      df[i] = -detail::fd_weights_forward(curve[n - 1].t - curve[n - 2].t, curve[n - 2].t - curve[n - 3].t,
                                          f[n - 1], f[n - 2], f[n - 3]);
    } else {
      df[i] = detail::fd_weights_central(curve[i].t - curve[i - 1].t, curve[i + 1].t - curve[i].t, f[i - 1], f[i],
                                         f[i + 1]);
    }
  }
  return df;
}

/// Displaces every sample by f along the outward normal and recomputes arc
/// length. The result carries no analytic tag unless f vanishes identically.
inline ProfileCurve normal_graph(const ProfileCurve& curve, std::span<const double> f) {
  const std::size_t n = curve.size();
  if (f.size() != n) fail(ErrorKind::InvalidArgument, "normal_graph: value count does not match samples");
  bool all_zero = true;
  for (double v : f) all_zero = all_zero && v == 0.0;
  if (all_zero) return curve;

  const std::vector<double> df = profile_derivative(curve, f);
  std::vector<ProfileSample> out(n);
  std::vector<double> speed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = curve[i];
    const double k1 = curve.curvatures(i).k1;
    const double stretch = 1.0 + k1 * f[i];
    if (stretch <= 0.0) fail(ErrorKind::SelfIntersection, "displacement reaches the focal set");
    const double vx = stretch * s.dx0 - df[i] * s.drho;
    const double vr = stretch * s.drho + df[i] * s.dx0;
    speed[i] = std::hypot(vx, vr);
    out[i].x0 = s.x0 - f[i] * s.drho;
    out[i].rho = s.rho + f[i] * s.dx0;
    out[i].dx0 = vx / speed[i];
    out[i].drho = vr / speed[i];
    if (curve.is_pole(i)) out[i].rho = 0.0;
    if (out[i].rho < -1e-14) fail(ErrorKind::SelfIntersection, "profile crosses the axis");
    out[i].rho = std::max(out[i].rho, 0.0);
  }
  out[0].t = curve[0].t;
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = curve[i].t - curve[i - 1].t;
    const double inc = 0.5 * dt * (speed[i] + speed[i - 1]);
    if (!(inc > 0.0)) fail(ErrorKind::SelfIntersection, "parameter reversal after displacement");
    out[i].t = out[i - 1].t + inc;
  }
  return ProfileCurve(std::move(out), AnalyticTag{}, curve.front_pole(), curve.back_pole());
}

inline ProfileCurve normal_graph(const ProfileCurve& curve, const std::function<double(double)>& f) {
  std::vector<double> v(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) v[i] = f(curve[i].t);
  return normal_graph(curve, v);
}

}  // namespace pmc
