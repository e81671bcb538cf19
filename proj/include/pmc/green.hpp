#pragma once

// Axially symmetric Green's function of Delta + 2 on the unit sphere with the
// l = 1 (kernel) mode projected out:
//
//   (Delta + 2) G = delta(source) - (3 / 4 pi) cos(psi),   <G, cos psi> = 0,
//
// where psi is the angle from the source. Its Legendre coefficients are
// g_l = (2l + 1) / (4 pi (2 - l(l + 1))) for l != 1 and g_1 = 0; the series
// sums to
//
//   G = (1 + x log(1 - x)) / (4 pi) + x (4 - 3 log 2) / (12 pi),  x = cos psi.

#include <cmath>
#include <vector>

#include "pmc/error.hpp"
#include "pmc/numerics.hpp"

namespace pmc {

/// Coefficients g_0 .. g_lmax of the series above.
inline std::vector<double> green_function(int l_max) {
  if (l_max < 8) fail(ErrorKind::InvalidArgument, "green_function needs l_max >= 8");
  std::vector<double> g(l_max + 1, 0.0);
  for (int l = 0; l <= l_max; ++l) {
    if (l == 1) continue;
    g[l] = (2.0 * l + 1.0) / (4.0 * pi * (2.0 - l * (l + 1.0)));
  }
  return g;
}

/// Truncated series at x = cos(psi).
inline double green_series(const std::vector<double>& coeffs, double x) {
  const auto p = legendre_values(static_cast<int>(coeffs.size()) - 1, x);
  double acc = 0.0;
  for (std::size_t l = 0; l < coeffs.size(); ++l) acc += coeffs[l] * p[l];
  return acc;
}

namespace detail {
inline constexpr double green_p1_shift = 0.05094439535643399;  // (4 - 3 log 2) / (12 pi)
}

/// Closed form as a function of the angle psi from the source.
inline double green_closed(double psi) {
  const double s = std::sin(0.5 * psi);
  const double x = std::cos(psi);
  return (1.0 + x * std::log(2.0 * s * s)) / (4.0 * pi) + x * detail::green_p1_shift;
}

/// dG/dpsi of the closed form.
inline double green_closed_derivative(double psi) {
  const double h = 0.5 * psi;
  const double s = std::sin(h);
  return -std::sin(psi) * (std::log(2.0 * s * s) / (4.0 * pi) + detail::green_p1_shift) +
         std::cos(psi) * (std::cos(h) / s) / (4.0 * pi);
}

/// d^2G/dpsi^2 of the closed form.
inline double green_closed_second_derivative(double psi) {
  const double s = std::sin(0.5 * psi);
  const double x = std::cos(psi);
  return (-x * std::log(2.0 * s * s) - 2.0 * (1.0 + x) - x / (2.0 * s * s)) / (4.0 * pi) -
         x * detail::green_p1_shift;
}

}  // namespace pmc
