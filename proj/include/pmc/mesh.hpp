#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pmc/error.hpp"
#include "pmc/profile.hpp"

namespace pmc {

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  int n_profile = 0;
  int n_angle = 0;

  double area() const {
    double a = 0.0;
    for (const auto& f : faces) {
      const Eigen::Vector3d e1 = vertices[f[1]] - vertices[f[0]];
      const Eigen::Vector3d e2 = vertices[f[2]] - vertices[f[0]];
      a += 0.5 * e1.cross(e2).norm();
    }
    return a;
  }

  int euler_characteristic() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& f : faces)
      for (int k = 0; k < 3; ++k) {
        int a = f[k], b = f[(k + 1) % 3];
        edges.emplace(std::min(a, b), std::max(a, b));
      }
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
  }
};

/// Surface of revolution of `curve`: one ring of n_angle vertices per sample,
/// a single vertex at each designated pole.
inline Mesh tessellate(const ProfileCurve& curve, int n_angle) {
  if (n_angle < 3) fail(ErrorKind::InvalidArgument, "tessellate needs n_angle >= 3");
  if (curve.size() < 2) fail(ErrorKind::InvalidArgument, "tessellate needs at least two samples");
  Mesh m;
  m.n_profile = static_cast<int>(curve.size());
  m.n_angle = n_angle;
  std::vector<int> ring_start(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& s = curve[i];
    ring_start[i] = static_cast<int>(m.vertices.size());
    if (curve.is_pole(i)) {
      m.vertices.emplace_back(s.x0, 0.0, 0.0);
      continue;
    }
    for (int j = 0; j < n_angle; ++j) {
      const double phi = 2.0 * pi * j / n_angle;
      m.vertices.emplace_back(s.x0, s.rho * std::cos(phi), s.rho * std::sin(phi));
    }
  }
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const int a = ring_start[i], b = ring_start[i + 1];
    const bool pa = curve.is_pole(i), pb = curve.is_pole(i + 1);
    for (int j = 0; j < n_angle; ++j) {
      const int jn = (j + 1) % n_angle;
      if (pa && pb) fail(ErrorKind::InvalidArgument, "profile consists of poles only");
      if (pa) {
        m.faces.push_back({a, b + jn, b + j});
      } else if (pb) {
        m.faces.push_back({a + j, a + jn, b});
      } else {
        m.faces.push_back({a + j, a + jn, b + jn});
        m.faces.push_back({a + j, b + jn, b + j});
      }
    }
  }
  return m;
}

/// Wavefront OBJ with 17 significant digits and 1-based faces.
inline void write_obj(std::ostream& os, const Mesh& m, const std::string& comment) {
  os << "# " << comment << "\n";
  os << "# n_profile " << m.n_profile << " n_angle " << m.n_angle << "\n";
  char buf[128];
  for (const auto& v : m.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
    os << buf;
  }
  for (const auto& f : m.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << "\n";
}

}  // namespace pmc
