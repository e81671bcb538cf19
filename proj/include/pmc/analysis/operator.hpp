#pragma once

// Discrete linearised operator on axially symmetric functions of a profile:
//
//   L f = (1/rho)(rho f')' + (|B|^2 + r^2 c1) f + r^2 c2 f',
//   c1 = <D1 F, N>,  c2 = -<D2 F, T>,
//
// as a finite-volume scheme on the dual cells of the samples (flux form,
// natural conditions at the poles). The stiffness part is symmetric with
// respect to the cell volumes, so sqrt(mass) similarity symmetrises it.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pmc/analysis/defect.hpp"
#include "pmc/error.hpp"
#include "pmc/pmc_function.hpp"
#include "pmc/profile.hpp"

namespace pmc {

struct DiscreteOperator {
  Eigen::VectorXd mass;   // integral of rho dt over each dual cell
  Eigen::VectorXd lower;  // coefficient of f[i-1] in row i
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;  // coefficient of f[i+1] in row i

  Eigen::Index size() const { return diag.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const {
    const Eigen::Index n = size();
    if (f.size() != n) fail(ErrorKind::InvalidArgument, "operator size mismatch");
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = diag[i] * f[i];
      if (i > 0) v += lower[i] * f[i - 1];
      if (i + 1 < n) v += upper[i] * f[i + 1];
      out[i] = v;
    }
    return out;
  }

  std::vector<double> apply(const std::vector<double>& f) const {
    const Eigen::VectorXd r = apply(Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())));
    return {r.data(), r.data() + r.size()};
  }

  /// Diagonal and sub-diagonal of sqrt(M) A sqrt(M)^-1 (symmetric part).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> symmetrized() const {
    const Eigen::Index n = size();
    Eigen::VectorXd sub(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double r = std::sqrt(mass[i] / mass[i + 1]);
      sub[i] = 0.5 * (upper[i] * r + lower[i + 1] / r);
    }
    return {diag, sub};
  }

  Eigen::MatrixXd dense() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      A(i, i) = diag[i];
      if (i > 0) A(i, i - 1) = lower[i];
      if (i + 1 < n) A(i, i + 1) = upper[i];
    }
    return A;
  }
};

namespace detail {

// Integrals over [0, 1/2] of the cubic Hermite basis (h00, h10, h01, h11).
inline constexpr double hermite_half[4] = {0.40625, 0.057291666666666664, 0.09375, -0.026041666666666668};

}  // namespace detail

inline DiscreteOperator linearized_operator(const ProfileCurve& c, const PMCFunction& F, double r) {
  const std::size_t n = c.size();
  if (n < 3) fail(ErrorKind::InvalidArgument, "operator needs at least three samples");
  DiscreteOperator op;
  op.mass = Eigen::VectorXd::Zero(n);
  op.lower = Eigen::VectorXd::Zero(n);
  op.diag = Eigen::VectorXd::Zero(n);
  op.upper = Eigen::VectorXd::Zero(n);
  std::vector<double> flux(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& a = c[i];
    const auto& b = c[i + 1];
    const double h = b.t - a.t;
    if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "profile samples must have increasing arc length");
    const double* w = detail::hermite_half;
    op.mass[i] += h * (w[0] * a.rho + w[1] * h * a.drho + w[2] * b.rho + w[3] * h * b.drho);
    op.mass[i + 1] += h * (w[2] * a.rho - w[3] * h * a.drho + w[0] * b.rho - w[1] * h * b.drho);
    const double rho_mid = 0.5 * (a.rho + b.rho) + h * (a.drho - b.drho) / 8.0;
    flux[i] = rho_mid / h;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(op.mass[i] > 0.0)) fail(ErrorKind::InvalidArgument, "degenerate cell volume");
    double d = 0.0;
    if (i > 0) {
      op.lower[i] = flux[i - 1] / op.mass[i];
      d -= op.lower[i];
    }
    if (i + 1 < n) {
      op.upper[i] = flux[i] / op.mass[i];
      d -= op.upper[i];
    }
    op.diag[i] = d + second_fundamental_norm_sq(c, i);
  }
  if (!F.is_zero() && r != 0.0) {
    const double r2 = r * r;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = c[i];
      const PMCDerivatives g = F.derivatives(sample_point(s), sample_normal(s));
      const double c1 = g.d1.dot(sample_normal(s));
      const double c2 = -g.d2.dot(sample_tangent(s));
      op.diag[i] += r2 * c1;
      if (c.is_pole(i) || c2 == 0.0) continue;  // f' vanishes at a pole
      if (i == 0 || i + 1 == n) {
        const std::size_t j = i == 0 ? 1 : n - 2;
        const double h = c[j].t - s.t;
        op.diag[i] -= r2 * c2 / h;
        (i == 0 ? op.upper[i] : op.lower[i]) += r2 * c2 / h;
        continue;
      }
      const double h1 = s.t - c[i - 1].t, h2 = c[i + 1].t - s.t;
      op.lower[i] += r2 * c2 * (-h2 / (h1 * (h1 + h2)));
      op.diag[i] += r2 * c2 * ((h2 - h1) / (h1 * h2));
      op.upper[i] += r2 * c2 * (h1 / (h2 * (h1 + h2)));
    }
  }
  return op;
}

inline DiscreteOperator linearized_operator(const GluedSurface& s, const PMCFunction& F) {
  return linearized_operator(s.profile, F, s.config.r);
}

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending by magnitude
  int kernel_count = 0;
  double threshold = 0.1;
};

/// The m eigenvalues of smallest magnitude of the symmetrised operator.
inline SpectralReport spectrum(const DiscreteOperator& op, int m, double threshold = 0.1) {
  if (m < 1 || m > op.size()) fail(ErrorKind::InvalidArgument, "requested eigenvalue count out of range");
  const auto [d, sub] = op.symmetrized();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::EigenSolveFailure, "tridiagonal eigensolver did not converge");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::stable_sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  SpectralReport rep;
  rep.threshold = threshold;
  for (double x : ev)
    if (std::abs(x) <= threshold) ++rep.kernel_count;
  ev.resize(m);
  rep.eigenvalues = std::move(ev);
  return rep;
}

}  // namespace pmc
