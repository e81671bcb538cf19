#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pmc/analysis/defect.hpp"
#include "pmc/analysis/projection.hpp"
#include "pmc/assembly.hpp"
#include "pmc/moments.hpp"

namespace pmc {

struct Resolution {
  int n_profile = 512;
  int n_angle = 64;
  int quad_order = 32;
  int l_max = 200;
};

struct BalancingConstants {
  double C1 = 0.0;
  double C1_prime = 0.0;
  double C1_prime_left = 0.0;   // from the probe on the sphere left of each neck
  double C1_prime_right = 0.0;  // from the probe on the sphere right of each neck
  double C2 = 0.0;
  double spread = 0.0;  // largest relative deviation of C1 or C2 over k
  Configuration config;
  std::size_t samples = 0;
};

/// Unit probes of the projections: C2 from chi_ext J_k against pi of sphere
/// k, C1 from chi_ext L(eta_k) against pi of neck k, C1' from the sphere
/// probes against the neck projections.
inline BalancingConstants balancing_constants(const GluedSurface& s, const ProjectionBasis& b) {
  const int K = s.config.K;
  if (K < 2) fail(ErrorKind::InvalidArgument, "balancing constants need K >= 2");
  BalancingConstants out;
  out.config = s.config;
  out.samples = s.profile.size();
  std::vector<double> c1, c2, cl, cr;
  for (int k = 1; k <= K; ++k) {
    const auto pi_ = project(b.W_basis[2 * (k - 1)], b);
    c2.push_back(pi_[2 * (k - 1)]);
    if (k < K) cl.push_back(-pi_[2 * k - 1] / std::pow(s.necks[k - 1].eps, 1.5));
    if (k > 1) cr.push_back(pi_[2 * k - 3] / std::pow(s.necks[k - 2].eps, 1.5));
  }
  for (int k = 1; k < K; ++k) c1.push_back(project(b.W_basis[2 * k - 1], b)[2 * k - 1]);
  auto mean = [](const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a += x;
    return a / static_cast<double>(v.size());
  };
  auto spread = [](const std::vector<double>& v, double m) {
    double d = 0.0;
    for (double x : v) d = std::max(d, std::abs(x - m) / std::abs(m));
    return d;
  };
  out.C1 = mean(c1);
  out.C2 = mean(c2);
  out.C1_prime_left = mean(cl);
  out.C1_prime_right = mean(cr);
  out.C1_prime = 0.5 * (out.C1_prime_left + out.C1_prime_right);
  out.spread = std::max(spread(c1, out.C1), spread(c2, out.C2));
  if (out.spread > 0.1) fail(ErrorKind::IllConditioned, "balancing constants vary by more than 10% across necks");
  return out;
}

struct NeckScales {
  std::vector<double> eps;
  double last_residual = 0.0;
  bool feasible = false;
};

/// Telescoping solution of C2 (eps_k - eps_{k-1}) = r^2 mu_k for k < K.
inline NeckScales solve_neck_scales(const MomentVector& mu, double r, double C2) {
  const int K = static_cast<int>(mu.mu.size());
  if (K < 2) fail(ErrorKind::InvalidArgument, "neck scales need K >= 2");
  if (C2 == 0.0) fail(ErrorKind::InvalidArgument, "C2 must be nonzero");
  NeckScales out;
  double acc = 0.0;
  out.feasible = true;
  for (int k = 0; k < K - 1; ++k) {
    acc += mu.mu[k];
    out.eps.push_back(r * r * acc / C2);
    out.feasible = out.feasible && out.eps.back() > 0.0;
  }
  out.last_residual = std::abs(C2 * out.eps.back() + r * r * mu.mu[K - 1]);
  return out;
}

/// M = diag(I_{K-1}, J) with J the K x (K-1) signed bidiagonal matrix. Rows
/// are ordered necks first, then spheres.
inline Eigen::MatrixXd balancing_matrix(int K) {
  if (K < 2) fail(ErrorKind::InvalidArgument, "balancing matrix needs K >= 2");
  const int m = K - 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * K - 1, 2 * m);
  for (int k = 0; k < m; ++k) {
    M(k, k) = 1.0;
    M(m + k, m + k) = 1.0;
    M(m + k + 1, m + k) = -1.0;
  }
  return M;
}

/// Reorders projections pi_1 .. pi_{2K-1} (spheres and necks interleaved)
/// into the row order of balancing_matrix.
inline Eigen::VectorXd to_block_order(const std::vector<double>& pi_) {
  const int K = static_cast<int>(pi_.size() + 1) / 2;
  Eigen::VectorXd v(2 * K - 1);
  for (int k = 0; k < K - 1; ++k) v[k] = pi_[2 * k + 1];
  for (int k = 0; k < K; ++k) v[K - 1 + k] = pi_[2 * k];
  return v;
}

/// Projections of the defect of the glued surface with f = 0.
inline std::vector<double> balancing_map(const Configuration& config, const PMCFunction& F, const Resolution& res,
                                         const GlueCounts* counts = nullptr) {
  const GluedSurface s = glue(config, res.l_max, res.n_profile, counts);
  const ProjectionBasis b = projection_basis(s);
  return project(mean_curvature_defect(s.profile, F, config.r), b);
}

struct BalancingState {
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<double> eps;
  double s = 0.0;
  std::vector<double> residual;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  double s_balanced = 0.0;        // root of the moment sum with tangent spheres
  double C2_response = 0.0;       // measured eps response in the normalization of the moments
  std::vector<double> telescoping_eps;  // solve_neck_scales at the solved s, sigma with C2_response
  GlueCounts counts;
};

struct BalancingOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
};

namespace detail {

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline Configuration balancing_config(int K, double r, const Eigen::VectorXd& x) {
  Configuration c;
  c.K = K;
  c.r = r;
  const int m = K - 1;
  for (int k = 0; k < m; ++k) {
    c.sigma.push_back(lambda_map(std::exp(x[k])));
    c.delta.push_back(x[m + k] * r);
  }
  c.s = x[2 * m];
  return c;
}

}  // namespace detail

/// Solves B_r(sigma, delta, s) = 0. The start is the telescoping solution at
/// the balanced center with C2 = -2 pi; the solve is a damped Newton iteration
/// on (log eps, delta / r, s) with a finite-difference Jacobian and sample
/// counts frozen at the start. Never throws on non-convergence; see
/// solve_balancing.
inline BalancingState balancing_attempt(const PMCFunction& F, int K, double r, double lo, double hi,
                                        const Resolution& res, const BalancingOptions& opt = {}) {
  if (K < 2) fail(ErrorKind::InvalidArgument, "balancing needs K >= 2");
  if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "r must be positive");
  const BalancedCenter bc = find_balanced_s(F, K, lo, hi, res.quad_order);
  const std::vector<double> zero_sigma(K - 1, 0.0);
  const NeckScales start = solve_neck_scales(moment_sum(F, bc.s0, K, zero_sigma, res.quad_order), r, -2.0 * pi);
  if (!start.feasible) fail(ErrorKind::Infeasible, "telescoping neck scales are not all positive");

  const int m = K - 1, n = 2 * K - 1;
  Eigen::VectorXd x(n);
  for (int k = 0; k < m; ++k) x[k] = std::log(start.eps[k]), x[m + k] = 0.0;
  x[2 * m] = bc.s0;

  const GluedSurface first = glue(detail::balancing_config(K, r, x), res.l_max, res.n_profile);
  BalancingState st;
  st.s_balanced = bc.s0;
  st.counts = first.counts;

  auto eval = [&](const Eigen::VectorXd& y) -> std::optional<std::vector<double>> {
    try {
      return balancing_map(detail::balancing_config(K, r, y), F, res, &st.counts);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  auto B = eval(x);
  if (!B) fail(ErrorKind::EmbeddingFailure, "starting configuration cannot be assembled");
  double norm = detail::max_abs(*B);
  Eigen::MatrixXd Jac(n, n);
  int it = 0;
  for (; it < opt.max_iterations && norm > opt.tolerance; ++it) {
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6;
      Eigen::VectorXd y = x;
      y[j] += h;
      auto Bp = eval(y);
      if (!Bp) {
        y[j] = x[j] - h;
        Bp = eval(y);
        if (!Bp) fail(ErrorKind::EmbeddingFailure, "cannot difference the balancing map");
        for (int i = 0; i < n; ++i) Jac(i, j) = ((*B)[i] - (*Bp)[i]) / h;
      } else {
        for (int i = 0; i < n; ++i) Jac(i, j) = ((*Bp)[i] - (*B)[i]) / h;
      }
    }
    const Eigen::VectorXd Bv = Eigen::Map<const Eigen::VectorXd>(B->data(), n);
    Eigen::VectorXd step = Jac.colPivHouseholderQr().solve(-Bv);
    // keep log eps and s moves moderate
    const double cap = std::max({step.head(m).cwiseAbs().maxCoeff() / 0.5, std::abs(step[2 * m]) / 0.25, 1.0});
    step /= cap;
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Eigen::VectorXd y = x + t * step;
      auto By = eval(y);
      if (!By) continue;
      const double ny = detail::max_abs(*By);
      if (ny < norm) {
        x = y, B = By, norm = ny;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  const Configuration cfg = detail::balancing_config(K, r, x);
  st.sigma = cfg.sigma;
  st.delta = cfg.delta;
  st.s = cfg.s;
  for (int k = 0; k < m; ++k) st.eps.push_back(std::exp(x[k]));
  st.residual = *B;
  st.residual_norm = norm;
  st.iterations = it;
  st.converged = norm <= opt.tolerance;

  // eps response of the sphere projections against their F-moment sensitivity
  const GluedSurface sol = glue(cfg, res.l_max, res.n_profile, &st.counts);
  const ProjectionBasis basis = projection_basis(sol);
  const MomentVector mu = moment_sum(F, st.s, K, st.sigma, res.quad_order);
  double c2 = 0.0;
  int used = 0;
  for (int k = 0; k < m; ++k) {
    double fj = 0.0;
    for (std::size_t i = 0; i < sol.profile.size(); ++i)
      fj += basis.volume[i] * basis.chi_ext_prime[k][i] * basis.J[k][i] *
            F(sample_point(sol.profile[i]), sample_normal(sol.profile[i]));
    if (fj == 0.0) continue;
    Eigen::VectorXd y = x;
    y[k] += 1e-6;
    const auto Bp = eval(y);
    if (!Bp) continue;
    const double response = ((*Bp)[2 * k] - (*B)[2 * k]) / (st.eps[k] * 1e-6);
    c2 += response * mu.mu[k] / fj;
    ++used;
  }
  if (used > 0) {
    st.C2_response = c2 / used;
    st.telescoping_eps = solve_neck_scales(mu, r, st.C2_response).eps;
  }
  st.feasible = st.converged;
  for (double e : st.eps) st.feasible = st.feasible && e > 0.0;
  return st;
}

/// As balancing_attempt, but raises MaxIterations unless the residual reaches
/// the tolerance.
inline BalancingState solve_balancing(const PMCFunction& F, int K, double r, double lo, double hi,
                                      const Resolution& res, const BalancingOptions& opt = {}) {
  BalancingState st = balancing_attempt(F, K, r, lo, hi, res, opt);
  if (!st.converged) fail(ErrorKind::MaxIterations, "balancing residual did not reach the tolerance");
  return st;
}

}  // namespace pmc
