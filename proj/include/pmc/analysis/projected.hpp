#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "pmc/analysis/defect.hpp"
#include "pmc/analysis/projection.hpp"
#include "pmc/analysis/weight.hpp"

namespace pmc {

struct ProjectedSolution {
  std::vector<double> f;
  std::vector<double> w_coeffs;
  int newton_iters = 0;
  double residual_sup = 0.0;
  double f_sup = 0.0;
  double f_weighted = 0.0;  // max zeta^-nu |f|
  double nu = 1.5;
};

struct ProjectedOptions {
  double tolerance = 1e-10;
  int max_iterations = 30;
};

/// Solves Phi(f) = sum c_i w_i with <f, w_i> = 0, where Phi(f) is H - 2 - r^2 F
/// of the normal graph of f, by Newton on the bordered system.
inline ProjectedSolution solve_projected(const GluedSurface& s, const PMCFunction& F, const ProjectionBasis& basis,
                                         double nu, const ProjectedOptions& opt = {}) {
  if (!(nu > 1.0 && nu < 2.0)) fail(ErrorKind::InvalidArgument, "nu must lie in (1, 2)");
  const double r = s.config.r;
  const std::size_t n = s.profile.size();
  const std::size_t m = basis.W_basis.size();
  ProjectedSolution out;
  out.nu = nu;
  out.f.assign(n, 0.0);
  out.w_coeffs.assign(m, 0.0);

  const std::vector<double> phi0 = mean_curvature_defect(s.profile, F, r);
  double sup0 = 0.0;
  for (double v : phi0) sup0 = std::max(sup0, std::abs(v));
  if (sup0 <= opt.tolerance) {
    out.residual_sup = sup0;
    return out;
  }

  const ProfileCurve base = s.profile.untagged();
  const auto N = static_cast<Eigen::Index>(n + m);
  auto phi_of = [&](const std::vector<double>& f) { return mean_curvature_defect(normal_graph(base, f), F, r); };

  // Jacobian of the discrete Phi by colored differences (row i depends on
  // f[i-3 .. i+3] at most), bordered by the w_i
  constexpr int band = 3, colors = 2 * band + 1;
  auto factor = [&](const std::vector<double>& f, const std::vector<double>& phi,
                    Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu) {
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> fp = f, h(n);
    for (int c = 0; c < colors; ++c) {
      fp = f;
      for (std::size_t j = c; j < n; j += colors) {
        h[j] = 1e-7 * std::max(1.0, std::abs(f[j]));
        fp[j] += h[j];
      }
      const std::vector<double> pp = phi_of(fp);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= band ? i - band : 0, hi = std::min(n - 1, i + band);
        for (std::size_t j = lo; j <= hi; ++j)
          if (static_cast<int>(j % colors) == c)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(j), (pp[i] - phi[i]) / h[j]);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double w = basis.W_basis[j][i];
        if (w == 0.0) continue;
        trip.emplace_back(static_cast<int>(i), static_cast<int>(n + j), -w);
        trip.emplace_back(static_cast<int>(n + j), static_cast<int>(i), w * basis.volume[i]);
      }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    lu.compute(A);
    if (lu.info() != Eigen::Success) fail(ErrorKind::NewtonDivergence, "bordered Jacobian is singular");
  };

  std::vector<double> phi;
  auto residual = [&](const std::vector<double>& f, const std::vector<double>& c, Eigen::VectorXd& R) {
    phi = phi_of(f);
    R.resize(N);
    for (std::size_t i = 0; i < n; ++i) {
      double v = phi[i];
      for (std::size_t j = 0; j < m; ++j) v -= c[j] * basis.W_basis[j][i];
      R[static_cast<Eigen::Index>(i)] = v;
    }
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += basis.volume[i] * f[i] * basis.W_basis[j][i];
      R[static_cast<Eigen::Index>(n + j)] = v;
    }
    return R.cwiseAbs().maxCoeff();
  };

  // first residual on the same finite-difference footing as the iterates
  Eigen::VectorXd R;
  double norm = 0.0;
  try {
    norm = residual(out.f, out.w_coeffs, R);
  } catch (const Error&) {
    fail(ErrorKind::NewtonDivergence, "initial residual cannot be evaluated");
  }

  int grow = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (norm <= opt.tolerance) break;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    factor(out.f, phi, lu);
    const Eigen::VectorXd step = lu.solve(-R);
    for (std::size_t i = 0; i < n; ++i) out.f[i] += step[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < m; ++j) out.w_coeffs[j] += step[static_cast<Eigen::Index>(n + j)];
    double next;
    try {
      next = residual(out.f, out.w_coeffs, R);
    } catch (const Error& e) {
      fail(ErrorKind::NewtonDivergence, std::string("Newton iterate left the admissible set: ") + e.what());
    }
    out.newton_iters = it + 1;
    grow = next > norm ? grow + 1 : 0;
    if (grow >= 3 || !std::isfinite(next)) fail(ErrorKind::NewtonDivergence, "Newton residual keeps growing");
    norm = next;
  }
  out.residual_sup = norm;
  if (norm > opt.tolerance) fail(ErrorKind::NewtonDivergence, "Newton did not converge in the iteration budget");

  const WeightFunction zeta = weight_function(s, default_weight_radius);
  for (std::size_t i = 0; i < n; ++i) {
    out.f_sup = std::max(out.f_sup, std::abs(out.f[i]));
    out.f_weighted = std::max(out.f_weighted, std::abs(out.f[i]) * std::pow(zeta.values[i], -nu));
  }
  return out;
}

}  // namespace pmc
