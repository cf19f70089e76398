#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shapegrad/extended_real.hpp"
#include "shapegrad/linalg.hpp"
#include "shapegrad/subdifferential.hpp"

namespace shapegrad {

// Catalog of convex gradient integrands f : R^n -> R.
//
//   Quadratic(s)       f(z) = (s/2)|z|^2
//   PowerNorm(p)       f(z) = |z|^p / p,  1 < p < inf
//   NonsmoothTorsion   f(z) = |z|        for |z| < 1
//                             (|z|^2+1)/2 for |z| >= 1   (elastoplastic torsion)
//   AbsNorm            f(z) = |z|   (p = 1; outside the standing growth
//                                    assumptions, admitted for 1D experiments)
//   Custom             user evaluation rule; conjugate by grid ascent
enum class ConvexKind { Quadratic, PowerNorm, NonsmoothTorsion, AbsNorm, Custom };

class ConvexIntegrand {
 public:
  static ConvexIntegrand quadratic(double scale, int dim);
  static ConvexIntegrand power_norm(double p, int dim);
  static ConvexIntegrand nonsmooth_torsion(int dim);
  static ConvexIntegrand abs_norm(int dim);
  static ConvexIntegrand custom(int dim, double growth_p,
                                std::function<double(const Vec2&)> eval);

  ConvexKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double growth_exponent() const { return p_; }
  const std::vector<double>& parameters() const { return params_; }

  // False for AbsNorm (p = 1): the 1D example built on it does not satisfy
  // the p > 1 growth bounds and is routed only to 1D experiments.
  bool within_standing_assumptions() const { return kind_ != ConvexKind::AbsNorm; }

  double eval(const Vec2& z) const;

  // Fenchel conjugate f*(z*). Closed form for catalog kinds; for Custom it is
  // approximated by ascent on a refined grid over |z| <= custom_grid_radius.
  ExtendedReal conjugate(const Vec2& zstar) const;

  // An element of df(z) with the exact symbolic set for catalog kinds.
  SubdifferentialElement subgradient(const Vec2& z) const;

  // prox_{mu f}(z) and the Moreau envelope f_mu(z) with its gradient.
  Vec2 prox(const Vec2& z, double mu) const;
  double moreau(const Vec2& z, double mu) const;
  Vec2 moreau_grad(const Vec2& z, double mu) const;

  // True when f has a locally Lipschitz gradient everywhere (no smoothing
  // needed by the solver).
  bool smooth() const;

  // Upper bound for the curvature of f where finite; the solver combines it
  // with 1/mu when smoothing.
  double curvature_bound() const;

  std::string kind_name() const;

  // Half-width of the ascent box used for Custom conjugates.
  static constexpr double custom_grid_radius = 8.0;

 private:
  ConvexKind kind_ = ConvexKind::Quadratic;
  int dim_ = 2;
  double p_ = 2.0;
  std::vector<double> params_;
  std::function<double(const Vec2&)> custom_eval_;
};

// Catalog of convex zero-order integrands g : R -> R.
//
//   Linear(lambda)   g(u) = -lambda u
//   HingeOneMinus    g(u) = (1 - u)_+   (outside the standing assumptions:
//                                        g(0) = 1; used by the 1D example)
//   Power(q)         g(u) = |u|^q / q
//   Custom           user evaluation rule
enum class ScalarKind { Linear, HingeOneMinus, Power, Custom };

class ScalarIntegrand {
 public:
  struct Interval {
    double lo = 0.0;
    double hi = 0.0;
  };

  static ScalarIntegrand linear(double lambda);
  static ScalarIntegrand hinge_one_minus();
  static ScalarIntegrand power(double q);
  static ScalarIntegrand custom(double growth_q, std::function<double(double)> eval);

  ScalarKind kind() const { return kind_; }
  double growth_exponent() const { return q_; }
  const std::vector<double>& parameters() const { return params_; }

  bool within_standing_assumptions() const { return kind_ != ScalarKind::HingeOneMinus; }

  double eval(double u) const;

  ExtendedReal conjugate(double xi) const;

  SubdifferentialElement subgradient(double u) const;

  // dg(u) as a closed interval.
  Interval subgradient_interval(double u) const;

  // Effective domain of g* as a closed interval (+-inf allowed).
  Interval conjugate_domain() const;

  // Conjugate evaluated after snapping xi onto dom g* when within snap_tol;
  // +inf beyond the tolerance. Keeps dual energies of indicator-type
  // conjugates evaluable in floating point; callers report the pre-snap
  // distance as a residual.
  ExtendedReal conjugate_snapped(double xi, double snap_tol) const;

  // argmin_w  c g(w) + (w - v)^2 / 2, closed form per kind.
  double prox(double v, double c) const;

  // argmin_w  c g(w) + a |w| + (w - v)^2 / 2 (relaxed boundary nodes).
  double prox_with_abs(double v, double c, double a) const;

  bool smooth() const;

  std::string kind_name() const;

 private:
  ScalarKind kind_ = ScalarKind::Linear;
  double q_ = 2.0;
  std::vector<double> params_;
  std::function<double(double)> custom_eval_;
};

// F(z) + F*(z*) - <z, z*>, always >= 0 (Fenchel-Young); zero exactly when
// z* is a subgradient of F at z.
ExtendedReal fenchel_gap(const ConvexIntegrand& f, const Vec2& z, const Vec2& zstar);
ExtendedReal fenchel_gap(const ScalarIntegrand& g, double u, double xi);

}  // namespace shapegrad
