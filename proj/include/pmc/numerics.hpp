#pragma once

// Small numerical helpers shared across modules: Gauss-Legendre rules,
// Legendre recurrences, the smooth transition bump, golden-section search.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "pmc/error.hpp"

namespace pmc {

inline constexpr double pi = std::numbers::pi;

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "quadrature order must be positive");
  QuadratureRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[n - 1 - i] = x;
    q.nodes[i] = -x;
    q.weights[i] = q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  return q;
}

/// Values P_0..P_lmax at x.
inline std::vector<double> legendre_values(int lmax, double x) {
  std::vector<double> p(lmax + 1);
  p[0] = 1.0;
  if (lmax >= 1) p[1] = x;
  for (int l = 2; l <= lmax; ++l) p[l] = ((2 * l - 1) * x * p[l - 1] - (l - 1) * p[l - 2]) / l;
  return p;
}

/// Smooth step: 0 for y <= 0, 1 for y >= 1, C-infinity in between.
inline double smooth_step(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / y);
  const double b = std::exp(-1.0 / (1.0 - y));
  return a / (a + b);
}

inline double smooth_step_derivative(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / y);
  const double b = std::exp(-1.0 / (1.0 - y));
  const double da = a / (y * y);
  const double db = -b / ((1.0 - y) * (1.0 - y));
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

inline double smooth_step_second_derivative(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  // psi = 1 / (1 + exp(g)) with g = 1/y - 1/(1 - y)
  const double a = std::exp(-1.0 / y);
  const double b = std::exp(-1.0 / (1.0 - y));
  const double p = a / (a + b), q = b / (a + b);
  const double g1 = -1.0 / (y * y) - 1.0 / ((1.0 - y) * (1.0 - y));
  const double g2 = 2.0 / (y * y * y) - 2.0 / ((1.0 - y) * (1.0 - y) * (1.0 - y));
  const double d1 = -p * q * g1;
  return -g2 * p * q - g1 * (q - p) * d1;
}

/// Golden-section minimisation on [lo, hi]; returns (argmin, min).
inline std::pair<double, double> golden_section(const std::function<double(double)>& f, double lo, double hi,
                                                double xtol, int max_iter = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Pairwise sum with a fixed reduction order.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace pmc
