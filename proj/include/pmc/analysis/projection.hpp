#pragma once

// Jacobi fields, cutoffs and the projections onto the approximate cokernel.
//
// Projection order: index 2j is the sphere projection of sphere j+1
// (integral of e chi'_ext J), index 2j+1 the neck projection of neck j+1
// (integral of e chi_neck I).
//
// All cutoffs are smooth steps in the cylindrical radius about a neck:
//   chi_ext(k)   1 beyond rho', 0 inside rho'/2 (ramp on [rho'/2, 3rho'/4])
//   eta(k)       bump on [3rho'/4, rho'] on sphere k's side, scaled by 1/rho'^2
//   chi'_ext(k)  1 beyond 2rho', 0 inside rho'
//   chi_neck(k)  1 inside rho', 0 beyond 2rho'

#include <cmath>
#include <vector>

#include "pmc/analysis/operator.hpp"
#include "pmc/analysis/weight.hpp"
#include "pmc/assembly.hpp"
#include "pmc/error.hpp"

namespace pmc {

/// <e0, N> on the samples of sphere k's side, scaled to unit L^2 norm over
/// its Sphere region; zero elsewhere.
inline std::vector<double> jacobi_sphere(int k, const GluedSurface& s) {
  const std::size_t n = s.profile.size();
  const auto w = volume_weights(s.profile);
  std::vector<double> J(n, 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.side[i] != k) continue;
    J[i] = -s.profile[i].drho;
    if (s.regions[i] == Region{Region::Kind::Sphere, k}) norm += w[i] * J[i] * J[i];
  }
  if (!(norm > 0.0)) fail(ErrorKind::InvalidArgument, "sphere region is empty");
  const double scale = 1.0 / std::sqrt(norm);
  for (double& x : J) x *= scale;
  return J;
}

/// Axial translation Jacobi field <e0, N> of neck k on the hemispheres facing
/// it; zero elsewhere.
inline std::vector<double> jacobi_neck(int k, const GluedSurface& s) {
  if (k < 1 || k > static_cast<int>(s.necks.size())) fail(ErrorKind::InvalidArgument, "no such neck");
  std::vector<double> I(s.profile.size(), 0.0);
  for (std::size_t i = 0; i < I.size(); ++i)
    if (std::isfinite(neck_radius(s, i, k))) I[i] = -s.profile[i].drho;
  return I;
}

struct ProjectionBasis {
  std::vector<std::vector<double>> chi_ext, chi_ext_prime, chi_neck, eta, J, I, L_eta;
  std::vector<std::vector<double>> W_basis;  // in projection order
  std::vector<double> volume;                // quadrature weights of dVol
};

namespace detail {

/// Product over the necks adjacent to sphere k of step((rho - a rho')/(b rho')).
inline double sphere_cutoff(const GluedSurface& s, std::size_t i, int k, double a, double b) {
  if (s.side[i] != k) return 0.0;
  double v = 1.0;
  for (int j : {k - 1, k}) {
    if (j < 1 || j > static_cast<int>(s.necks.size())) continue;
    const double rp = s.necks[j - 1].rho_prime;
    v *= smooth_step((neck_radius(s, i, j) - a * rp) / (b * rp));
  }
  return v;
}

}  // namespace detail

inline ProjectionBasis projection_basis(const GluedSurface& s) {
  const int K = s.config.K;
  const std::size_t n = s.profile.size();
  for (const auto& nk : s.necks)
    if (!(2.0 * nk.rho_prime < 0.5))
      fail(ErrorKind::GeometryTooTight, "neck too large for disjoint cutoff supports");
  ProjectionBasis b;
  b.volume = volume_weights(s.profile);
  for (int k = 1; k <= K; ++k) {
    std::vector<double> ce(n), cp(n);
    for (std::size_t i = 0; i < n; ++i) {
      ce[i] = detail::sphere_cutoff(s, i, k, 0.5, 0.25);
      cp[i] = detail::sphere_cutoff(s, i, k, 1.0, 1.0);
    }
    b.chi_ext.push_back(std::move(ce));
    b.chi_ext_prime.push_back(std::move(cp));
    b.J.push_back(jacobi_sphere(k, s));
  }
  const DiscreteOperator L = linearized_operator(s.profile, PMCFunction::zero(), 0.0);
  for (int k = 1; k < K; ++k) {
    const double rp = s.necks[k - 1].rho_prime;
    std::vector<double> cn(n), eta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = neck_radius(s, i, k);
      cn[i] = 1.0 - smooth_step((x - rp) / rp);
      if (s.side[i] == k)
        eta[i] = smooth_step((x - 0.75 * rp) / (0.125 * rp)) * (1.0 - smooth_step((x - 0.875 * rp) / (0.125 * rp))) /
                 (rp * rp);
    }
    std::vector<double> le = L.apply(eta);
    for (std::size_t i = 0; i < n; ++i) le[i] *= b.chi_ext[k - 1][i];
    b.chi_neck.push_back(std::move(cn));
    b.eta.push_back(std::move(eta));
    b.I.push_back(jacobi_neck(k, s));
    b.L_eta.push_back(std::move(le));
  }
  for (int k = 1; k <= K; ++k) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = b.chi_ext[k - 1][i] * b.J[k - 1][i];
    b.W_basis.push_back(std::move(w));
    if (k < K) b.W_basis.push_back(b.L_eta[k - 1]);
  }
  return b;
}

/// Projections pi_1 .. pi_{2K-1} of a sampled function.
inline std::vector<double> project(const std::vector<double>& e, const ProjectionBasis& b) {
  const int K = static_cast<int>(b.J.size());
  if (e.size() != b.volume.size()) fail(ErrorKind::InvalidArgument, "function size does not match the surface");
  std::vector<double> pi_(2 * K - 1);
  std::vector<double> f(e.size());
  for (int k = 1; k <= K; ++k) {
    for (std::size_t i = 0; i < e.size(); ++i) f[i] = e[i] * b.chi_ext_prime[k - 1][i] * b.J[k - 1][i];
    pi_[2 * (k - 1)] = integrate(b.volume, f);
    if (k == K) break;
    for (std::size_t i = 0; i < e.size(); ++i) f[i] = e[i] * b.chi_neck[k - 1][i] * b.I[k - 1][i];
    pi_[2 * k - 1] = integrate(b.volume, f);
  }
  return pi_;
}

}  // namespace pmc
