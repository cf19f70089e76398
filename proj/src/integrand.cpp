#include "shapegrad/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shapegrad {

namespace {

double conjugate_exponent(double p) { return p / (p - 1.0); }

// Monotone solve of t + c * t^(q-1) = s on t >= 0 (c >= 0, s >= 0, q > 1).
double solve_power_prox(double s, double c, double q) {
  if (s <= 0.0) return 0.0;
  if (q == 2.0) return s / (1.0 + c);
  if (q > 2.0) {
    // Newton from t = s; map is convex increasing, converges monotonically.
    double t = s;
    for (int it = 0; it < 60; ++it) {
      const double g = t + c * std::pow(t, q - 1.0) - s;
      const double dg = 1.0 + c * (q - 1.0) * std::pow(t, q - 2.0);
      const double step = g / dg;
      t -= step;
      if (t < 0.0) t = 0.0;
      if (std::abs(step) <= 1e-16 * (1.0 + t)) break;
    }
    return t;
  }
  // 1 < q < 2: derivative blows up at 0; bisection is safe.
  double lo = 0.0, hi = s;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid + c * std::pow(mid, q - 1.0) - s;
    (g < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexIntegrand

ConvexIntegrand ConvexIntegrand::quadratic(double scale, int dim) {
  if (scale <= 0.0) throw std::invalid_argument("quadratic integrand needs scale > 0");
  ConvexIntegrand f;
  f.kind_ = ConvexKind::Quadratic;
  f.dim_ = dim;
  f.p_ = 2.0;
  f.params_ = {scale};
  return f;
}

ConvexIntegrand ConvexIntegrand::power_norm(double p, int dim) {
  if (p <= 1.0) throw std::invalid_argument("power_norm needs p > 1");
  ConvexIntegrand f;
  f.kind_ = ConvexKind::PowerNorm;
  f.dim_ = dim;
  f.p_ = p;
  f.params_ = {p};
  return f;
}

ConvexIntegrand ConvexIntegrand::nonsmooth_torsion(int dim) {
  ConvexIntegrand f;
  f.kind_ = ConvexKind::NonsmoothTorsion;
  f.dim_ = dim;
  f.p_ = 2.0;
  return f;
}

ConvexIntegrand ConvexIntegrand::abs_norm(int dim) {
  ConvexIntegrand f;
  f.kind_ = ConvexKind::AbsNorm;
  f.dim_ = dim;
  f.p_ = 1.0;
  return f;
}

ConvexIntegrand ConvexIntegrand::custom(int dim, double growth_p,
                                        std::function<double(const Vec2&)> eval) {
  ConvexIntegrand f;
  f.kind_ = ConvexKind::Custom;
  f.dim_ = dim;
  f.p_ = growth_p;
  f.custom_eval_ = std::move(eval);
  return f;
}

double ConvexIntegrand::eval(const Vec2& z) const {
  const double n = norm(z);
  switch (kind_) {
    case ConvexKind::Quadratic:
      return 0.5 * params_[0] * n * n;
    case ConvexKind::PowerNorm:
      return std::pow(n, p_) / p_;
    case ConvexKind::NonsmoothTorsion:
      return n < 1.0 ? n : 0.5 * (n * n + 1.0);
    case ConvexKind::AbsNorm:
      return n;
    case ConvexKind::Custom:
      return custom_eval_(z);
  }
  return 0.0;
}

ExtendedReal ConvexIntegrand::conjugate(const Vec2& zstar) const {
  const double n = norm(zstar);
  switch (kind_) {
    case ConvexKind::Quadratic:
      return 0.5 * n * n / params_[0];
    case ConvexKind::PowerNorm: {
      const double pc = conjugate_exponent(p_);
      return std::pow(n, pc) / pc;
    }
    case ConvexKind::NonsmoothTorsion:
      return n <= 1.0 ? 0.0 : 0.5 * (n * n - 1.0);
    case ConvexKind::AbsNorm:
      // Indicator of the unit ball, with a membership slack at rounding scale
      // so that normalized subgradients z/|z| stay inside.
      if (n <= 1.0 + 1e-12) return 0.0;
      return ExtendedReal::infinity();
    case ConvexKind::Custom: {
      // Ascent on a refined grid; accurate to the final grid spacing times
      // the local slope, reported as approximate in the interface docs.
      double half = custom_grid_radius;
      Vec2 center{0.0, 0.0};
      double best = -std::numeric_limits<double>::infinity();
      Vec2 argbest = center;
      for (int pass = 0; pass < 3; ++pass) {
        const int m = pass == 0 ? 80 : 40;
        for (int i = 0; i <= m; ++i) {
          const double zx = center.x - half + 2.0 * half * i / m;
          if (dim_ == 1) {
            const Vec2 z{zx, 0.0};
            const double v = dot(z, zstar) - custom_eval_(z);
            if (v > best) { best = v; argbest = z; }
            continue;
          }
          for (int j = 0; j <= m; ++j) {
            const double zy = center.y - half + 2.0 * half * j / m;
            const Vec2 z{zx, zy};
            const double v = dot(z, zstar) - custom_eval_(z);
            if (v > best) { best = v; argbest = z; }
          }
        }
        center = argbest;
        half *= 2.5 / m;
      }
      return best;
    }
  }
  return 0.0;
}

SubdifferentialElement ConvexIntegrand::subgradient(const Vec2& z) const {
  const double n = norm(z);
  switch (kind_) {
    case ConvexKind::Quadratic:
      return SubdifferentialElement::singleton(params_[0] * z);
    case ConvexKind::PowerNorm:
      if (n == 0.0) return SubdifferentialElement::singleton({0.0, 0.0});
      return SubdifferentialElement::singleton(std::pow(n, p_ - 2.0) * z);
    case ConvexKind::NonsmoothTorsion:
      if (n == 0.0)
        return SubdifferentialElement::ball({0.0, 0.0}, 1.0, {0.0, 0.0});
      if (n < 1.0) return SubdifferentialElement::singleton((1.0 / n) * z);
      return SubdifferentialElement::singleton(z);
    case ConvexKind::AbsNorm:
      if (n == 0.0)
        return SubdifferentialElement::ball({0.0, 0.0}, 1.0, {0.0, 0.0});
      return SubdifferentialElement::singleton((1.0 / n) * z);
    case ConvexKind::Custom:
      throw std::invalid_argument("custom integrand has no subgradient rule");
  }
  return SubdifferentialElement::singleton({0.0, 0.0});
}

Vec2 ConvexIntegrand::prox(const Vec2& z, double mu) const {
  const double s = norm(z);
  double t = 0.0;
  switch (kind_) {
    case ConvexKind::Quadratic:
      t = s / (1.0 + mu * params_[0]);
      break;
    case ConvexKind::PowerNorm:
      t = solve_power_prox(s, mu, p_);
      break;
    case ConvexKind::NonsmoothTorsion:
      if (s <= mu) t = 0.0;
      else if (s <= 1.0 + mu) t = s - mu;
      else t = s / (1.0 + mu);
      break;
    case ConvexKind::AbsNorm:
      t = std::max(0.0, s - mu);
      break;
    case ConvexKind::Custom:
      throw std::invalid_argument("custom integrand has no prox rule");
  }
  if (s == 0.0) return {0.0, 0.0};
  return (t / s) * z;
}

double ConvexIntegrand::moreau(const Vec2& z, double mu) const {
  const Vec2 w = prox(z, mu);
  return eval(w) + 0.5 * norm2(z - w) / mu;
}

Vec2 ConvexIntegrand::moreau_grad(const Vec2& z, double mu) const {
  return (1.0 / mu) * (z - prox(z, mu));
}

bool ConvexIntegrand::smooth() const {
  switch (kind_) {
    case ConvexKind::Quadratic:
      return true;
    case ConvexKind::PowerNorm:
      return p_ >= 2.0;
    default:
      return false;
  }
}

double ConvexIntegrand::curvature_bound() const {
  switch (kind_) {
    case ConvexKind::Quadratic:
      return params_[0];
    case ConvexKind::NonsmoothTorsion:
      return 1.0;  // curvature of the quadratic branch; the kink needs smoothing
    default:
      return std::numeric_limits<double>::infinity();
  }
}

std::string ConvexIntegrand::kind_name() const {
  switch (kind_) {
    case ConvexKind::Quadratic: return "quadratic";
    case ConvexKind::PowerNorm: return "power_norm";
    case ConvexKind::NonsmoothTorsion: return "nonsmooth_torsion";
    case ConvexKind::AbsNorm: return "abs_norm";
    case ConvexKind::Custom: return "custom";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ScalarIntegrand

ScalarIntegrand ScalarIntegrand::linear(double lambda) {
  ScalarIntegrand g;
  g.kind_ = ScalarKind::Linear;
  g.q_ = 2.0;
  g.params_ = {lambda};
  return g;
}

ScalarIntegrand ScalarIntegrand::hinge_one_minus() {
  ScalarIntegrand g;
  g.kind_ = ScalarKind::HingeOneMinus;
  g.q_ = 1.0;
  return g;
}

ScalarIntegrand ScalarIntegrand::power(double q) {
  if (q <= 1.0) throw std::invalid_argument("power integrand needs q > 1");
  ScalarIntegrand g;
  g.kind_ = ScalarKind::Power;
  g.q_ = q;
  g.params_ = {q};
  return g;
}

ScalarIntegrand ScalarIntegrand::custom(double growth_q, std::function<double(double)> eval) {
  ScalarIntegrand g;
  g.kind_ = ScalarKind::Custom;
  g.q_ = growth_q;
  g.custom_eval_ = std::move(eval);
  return g;
}

double ScalarIntegrand::eval(double u) const {
  switch (kind_) {
    case ScalarKind::Linear:
      return -params_[0] * u;
    case ScalarKind::HingeOneMinus:
      return std::max(1.0 - u, 0.0);
    case ScalarKind::Power:
      return std::pow(std::abs(u), q_) / q_;
    case ScalarKind::Custom:
      return custom_eval_(u);
  }
  return 0.0;
}

ExtendedReal ScalarIntegrand::conjugate(double xi) const {
  switch (kind_) {
    case ScalarKind::Linear:
      if (xi == -params_[0]) return 0.0;
      return ExtendedReal::infinity();
    case ScalarKind::HingeOneMinus:
      if (xi >= -1.0 && xi <= 0.0) return xi;
      return ExtendedReal::infinity();
    case ScalarKind::Power: {
      const double qc = conjugate_exponent(q_);
      return std::pow(std::abs(xi), qc) / qc;
    }
    case ScalarKind::Custom: {
      double half = 64.0, center = 0.0;
      double best = -std::numeric_limits<double>::infinity();
      double argbest = 0.0;
      for (int pass = 0; pass < 4; ++pass) {
        const int m = 256;
        for (int i = 0; i <= m; ++i) {
          const double u = center - half + 2.0 * half * i / m;
          const double v = xi * u - custom_eval_(u);
          if (v > best) { best = v; argbest = u; }
        }
        center = argbest;
        half *= 4.0 / m;
      }
      return best;
    }
  }
  return 0.0;
}

SubdifferentialElement ScalarIntegrand::subgradient(double u) const {
  const Interval iv = subgradient_interval(u);
  if (iv.lo == iv.hi) return SubdifferentialElement::singleton({iv.lo, 0.0});
  // Minimal-norm representative.
  const double rep = std::clamp(0.0, iv.lo, iv.hi);
  return SubdifferentialElement::segment(iv.lo, iv.hi, rep);
}

ScalarIntegrand::Interval ScalarIntegrand::subgradient_interval(double u) const {
  switch (kind_) {
    case ScalarKind::Linear:
      return {-params_[0], -params_[0]};
    case ScalarKind::HingeOneMinus: {
      constexpr double kink_tol = 1e-12;
      if (u < 1.0 - kink_tol) return {-1.0, -1.0};
      if (u > 1.0 + kink_tol) return {0.0, 0.0};
      return {-1.0, 0.0};
    }
    case ScalarKind::Power: {
      if (u == 0.0) return {0.0, 0.0};
      const double s = std::pow(std::abs(u), q_ - 1.0) * (u > 0.0 ? 1.0 : -1.0);
      return {s, s};
    }
    case ScalarKind::Custom:
      throw std::invalid_argument("custom integrand has no subgradient rule");
  }
  return {0.0, 0.0};
}

ScalarIntegrand::Interval ScalarIntegrand::conjugate_domain() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case ScalarKind::Linear:
      return {-params_[0], -params_[0]};
    case ScalarKind::HingeOneMinus:
      return {-1.0, 0.0};
    case ScalarKind::Power:
    case ScalarKind::Custom:
      return {-inf, inf};
  }
  return {-inf, inf};
}

ExtendedReal ScalarIntegrand::conjugate_snapped(double xi, double snap_tol) const {
  const Interval dom = conjugate_domain();
  const double clamped = std::clamp(xi, dom.lo, dom.hi);
  if (std::abs(clamped - xi) > snap_tol) return ExtendedReal::infinity();
  return conjugate(clamped);
}

double ScalarIntegrand::prox(double v, double c) const {
  switch (kind_) {
    case ScalarKind::Linear:
      return v + c * params_[0];
    case ScalarKind::HingeOneMinus:
      if (v + c < 1.0) return v + c;
      if (v > 1.0) return v;
      return 1.0;
    case ScalarKind::Power: {
      const double t = solve_power_prox(std::abs(v), c, q_);
      return v >= 0.0 ? t : -t;
    }
    case ScalarKind::Custom:
      throw std::invalid_argument("custom integrand has no prox rule");
  }
  return v;
}

double ScalarIntegrand::prox_with_abs(double v, double c, double a) const {
  if (a == 0.0) return prox(v, c);
  switch (kind_) {
    case ScalarKind::Linear: {
      const double w = v + c * params_[0];
      // soft threshold by a
      if (w > a) return w - a;
      if (w < -a) return w + a;
      return 0.0;
    }
    case ScalarKind::HingeOneMinus: {
      if (v + c + a < 0.0) return v + c + a;
      if (v <= -c + a) return 0.0;  // v in [-c-a, -c+a]
      if (v + c - a < 1.0) return v + c - a;
      if (v <= 1.0 + a) return 1.0;  // v in [1-c+a, 1+a]
      return v - a;
    }
    case ScalarKind::Power: {
      const double w = std::abs(v) - a;
      if (w <= 0.0) return 0.0;
      const double t = solve_power_prox(w, c, q_);
      return v >= 0.0 ? t : -t;
    }
    case ScalarKind::Custom:
      throw std::invalid_argument("custom integrand has no prox rule");
  }
  return v;
}

bool ScalarIntegrand::smooth() const {
  switch (kind_) {
    case ScalarKind::Linear:
      return true;
    case ScalarKind::Power:
      return q_ >= 2.0;
    default:
      return false;
  }
}

std::string ScalarIntegrand::kind_name() const {
  switch (kind_) {
    case ScalarKind::Linear: return "linear";
    case ScalarKind::HingeOneMinus: return "hinge_one_minus";
    case ScalarKind::Power: return "power";
    case ScalarKind::Custom: return "custom";
  }
  return "?";
}

// ---------------------------------------------------------------------------

ExtendedReal fenchel_gap(const ConvexIntegrand& f, const Vec2& z, const Vec2& zstar) {
  ExtendedReal r = f.conjugate(zstar);
  if (!r.is_finite()) return r;
  return f.eval(z) + r.value() - dot(z, zstar);
}

ExtendedReal fenchel_gap(const ScalarIntegrand& g, double u, double xi) {
  ExtendedReal r = g.conjugate(xi);
  if (!r.is_finite()) return r;
  return g.eval(u) + r.value() - u * xi;
}

}  // namespace shapegrad
