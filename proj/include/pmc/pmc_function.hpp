#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Core>

#include "pmc/error.hpp"
#include "pmc/expr.hpp"

namespace pmc {

using Vec3 = Eigen::Vector3d;

/// Reduces (p, N) to the invariant coordinates. Nrho is the component of N
/// along the outward radial direction at p, taken as 0 on the axis.
inline InvariantArgs invariant_args(const Vec3& p, const Vec3& n) {
  InvariantArgs a;
  a.p0 = p[0];
  a.rho = std::hypot(p[1], p[2]);
  a.n0 = n[0];
  a.nrho = a.rho > 0.0 ? (p[1] * n[1] + p[2] * n[2]) / a.rho : 0.0;
  return a;
}

struct ExpressionKind {
  PMCExpr expr;
};

/// F(p, N) = C (p0)^2
struct RotatingDrop {
  double C;
};

/// F(p, N) = -C <grad phi(p), N> for an axisymmetric potential phi(p0, rho).
struct ChargedFilm {
  double C;
  PMCExpr phi;
};

struct PMCDerivatives {
  Vec3 d1;  // derivative in the point slot
  Vec3 d2;  // derivative in the normal slot
};

class PMCFunction {
 public:
  using Kind = std::variant<ExpressionKind, RotatingDrop, ChargedFilm>;

  explicit PMCFunction(Kind kind, double fd_step = 1e-6) : kind_(std::move(kind)), fd_step_(fd_step) {
    if (!(fd_step_ > 0.0)) fail(ErrorKind::InvalidArgument, "fd_step must be positive");
    if (auto* cf = std::get_if<ChargedFilm>(&kind_)) {
      if (cf->phi.empty() || cf->phi.uses(Var::N0) || cf->phi.uses(Var::NRho))
        fail(ErrorKind::InvalidArgument, "charged-film potential may only depend on p0 and rho");
    }
  }

  static PMCFunction expression(std::string_view source, double fd_step = 1e-6) {
    return PMCFunction(ExpressionKind{parse_pmc(source)}, fd_step);
  }
  static PMCFunction rotating_drop(double C) { return PMCFunction(RotatingDrop{C}); }
  static PMCFunction charged_film(double C, std::string_view phi) {
    return PMCFunction(ChargedFilm{C, parse_pmc(phi)});
  }
  static PMCFunction zero() { return expression("0"); }

  const Kind& kind() const { return kind_; }
  double fd_step() const { return fd_step_; }

  /// True when F is the literal constant 0.
  bool is_zero() const {
    auto* e = std::get_if<ExpressionKind>(&kind_);
    if (e == nullptr) return std::visit([](const auto& k) { return coefficient(k) == 0.0; }, kind_);
    auto* l = std::get_if<Literal>(&e->expr.root()->v);
    return l != nullptr && l->value == 0.0;
  }

  /// Evaluates on invariant coordinates directly; used by profile-curve code
  /// where points already live in the (x0, rho) half-plane.
  double eval(const InvariantArgs& a) const {
    struct Visitor {
      const InvariantArgs& a;
      double h;
      double operator()(const ExpressionKind& e) const { return e.expr.eval(a); }
      double operator()(const RotatingDrop& d) const { return d.C * a.p0 * a.p0; }
      double operator()(const ChargedFilm& f) const {
        auto phi = [&](double p0, double rho) {
          InvariantArgs b;
          b.p0 = p0;
          b.rho = rho;
          return f.phi.eval(b);
        };
        const double dphi0 = (phi(a.p0 + h, a.rho) - phi(a.p0 - h, a.rho)) / (2 * h);
        // phi is even in rho as a function on R^3, so the radial derivative at
        // the axis vanishes; away from it use a central difference.
        double dphirho = 0.0;
        if (a.rho > h) dphirho = (phi(a.p0, a.rho + h) - phi(a.p0, a.rho - h)) / (2 * h);
        else if (a.rho > 0.0) dphirho = (phi(a.p0, a.rho + h) - phi(a.p0, std::abs(a.rho - h))) / (2 * h);
        return -f.C * (dphi0 * a.n0 + dphirho * a.nrho);
      }
    };
    return std::visit(Visitor{a, fd_step_}, kind_);
  }

  double operator()(const Vec3& p, const Vec3& n) const {
    if (std::abs(n.norm() - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "normal is not a unit vector");
    return eval(invariant_args(p, n));
  }

  /// Central differences in each ambient component of p and of N. N is
  /// perturbed without renormalisation.
  PMCDerivatives derivatives(const Vec3& p, const Vec3& n) const {
    PMCDerivatives d;
    const double h = fd_step_;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = h;
      d.d1[i] = (eval(invariant_args(p + e, n)) - eval(invariant_args(p - e, n))) / (2 * h);
      d.d2[i] = (eval(invariant_args(p, n + e)) - eval(invariant_args(p, n - e))) / (2 * h);
    }
    return d;
  }

  /// Canonical textual form: an expression source or a builtin spec.
  std::string describe() const {
    struct Visitor {
      std::string operator()(const ExpressionKind& e) const { return e.expr.to_string(); }
      std::string operator()(const RotatingDrop& d) const {
        return "rotating_drop(" + format_number(d.C) + ")";
      }
      std::string operator()(const ChargedFilm& f) const {
        return "charged_film(" + format_number(f.C) + ", " + f.phi.to_string() + ")";
      }
    };
    return std::visit(Visitor{}, kind_);
  }

 private:
  Kind kind_;
  double fd_step_;

  static double coefficient(const ExpressionKind&) { return 1.0; }
  static double coefficient(const RotatingDrop& d) { return d.C; }
  static double coefficient(const ChargedFilm& f) { return f.C; }
};

inline double eval_pmc(const PMCFunction& F, const Vec3& p, const Vec3& n) { return F(p, n); }

inline PMCDerivatives pmc_derivatives(const PMCFunction& F, const Vec3& p, const Vec3& n) {
  return F.derivatives(p, n);
}

}  // namespace pmc
