#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pmc/assembly.hpp"
#include "pmc/error.hpp"
#include "pmc/numerics.hpp"

namespace pmc {

/// Trapezoid weights of dVol = 2 pi rho dt on the profile samples.
inline std::vector<double> volume_weights(const ProfileCurve& c) {
  const std::size_t n = c.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = c[i + 1].t - c[i].t;
    w[i] += pi * c[i].rho * h;
    w[i + 1] += pi * c[i + 1].rho * h;
  }
  return w;
}

inline double integrate(const std::vector<double>& weights, const std::vector<double>& f) {
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) terms[i] = weights[i] * f[i];
  return pairwise_sum(terms);
}

/// Cylindrical radius of sample i seen from neck k (1-based): rho on the two
/// hemispheres facing the neck, infinity elsewhere.
inline double neck_radius(const GluedSurface& s, std::size_t i, int k) {
  const auto& p = s.profile[i];
  return std::abs(p.x0 - s.necks[k - 1].waist_center()) < 1.0 ? p.rho : std::numeric_limits<double>::infinity();
}

struct WeightFunction {
  double R = 0.0;
  std::vector<double> values;
};

/// zeta = cylindrical radius about the nearest neck inside R/2, 1 beyond R, and a
/// smooth-step blend of the two in between.
inline WeightFunction weight_function(const GluedSurface& s, double R) {
  WeightFunction w;
  w.R = R;
  const std::size_t n = s.profile.size();
  w.values.assign(n, 1.0);
  if (s.necks.empty()) return w;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < s.necks.size(); ++k)
    min_gap = std::min(min_gap, s.necks[k].waist_center() - s.necks[k - 1].waist_center());
  for (const auto& nk : s.necks)
    if (!(R > nk.rho_prime)) fail(ErrorKind::InvalidArgument, "weight radius must exceed every rho'");
  if (!(R < 0.5 * min_gap) || !(R < 1.0)) fail(ErrorKind::InvalidArgument, "weight radius too large for the neck spacing");
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= static_cast<int>(s.necks.size()); ++k) d = std::min(d, neck_radius(s, i, k));
    if (d >= R) continue;
    const double b = smooth_step((d - 0.5 * R) / (0.5 * R));
    w.values[i] = (1.0 - b) * d + b;
  }
  return w;
}

}  // namespace pmc
