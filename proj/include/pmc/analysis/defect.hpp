#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pmc/analysis/weight.hpp"
#include "pmc/assembly.hpp"
#include "pmc/pmc_function.hpp"

namespace pmc {

inline Vec3 sample_point(const ProfileSample& s) { return {s.x0, s.rho, 0.0}; }
inline Vec3 sample_normal(const ProfileSample& s) { return {-s.drho, s.dx0, 0.0}; }
inline Vec3 sample_tangent(const ProfileSample& s) { return {s.dx0, s.drho, 0.0}; }

/// H - 2 - r^2 F at every sample of a profile.
inline std::vector<double> mean_curvature_defect(const ProfileCurve& c, const PMCFunction& F, double r) {
  std::vector<double> d(c.size());
  const bool zero = F.is_zero();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double H = mean_curvature(c, i);
    d[i] = H - 2.0 - (zero ? 0.0 : r * r * F(sample_point(c[i]), sample_normal(c[i])));
  }
  return d;
}

struct DefectReport {
  std::vector<double> defect;
  double sup_sphere = 0.0;
  double sup_neck = 0.0;
  double sup_transition = 0.0;
  double weighted_norm = 0.0;
  double nu = 1.5;
};

inline constexpr double default_weight_radius = 0.5;

inline DefectReport defect(const GluedSurface& s, const PMCFunction& F, double nu,
                           double R = default_weight_radius) {
  if (!(nu > 1.0 && nu < 2.0)) fail(ErrorKind::InvalidArgument, "nu must lie in (1, 2)");
  DefectReport rep;
  rep.nu = nu;
  rep.defect = mean_curvature_defect(s.profile, F, s.config.r);
  const WeightFunction w = weight_function(s, R);
  for (std::size_t i = 0; i < rep.defect.size(); ++i) {
    const double a = std::abs(rep.defect[i]);
    switch (s.regions[i].kind) {
      case Region::Kind::Sphere: rep.sup_sphere = std::max(rep.sup_sphere, a); break;
      case Region::Kind::Neck: rep.sup_neck = std::max(rep.sup_neck, a); break;
      case Region::Kind::Transition: rep.sup_transition = std::max(rep.sup_transition, a); break;
    }
    rep.weighted_norm = std::max(rep.weighted_norm, std::pow(w.values[i], 2.0 - nu) * a);
  }
  return rep;
}

}  // namespace pmc
