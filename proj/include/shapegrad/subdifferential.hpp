#pragma once

#include <limits>

#include "shapegrad/linalg.hpp"

namespace shapegrad {

enum class SubdifferentialSetKind {
  Singleton,
  Ball,              // closed ball in R^n: center, radius
  Segment,           // scalar interval [a, b]
  HalfLineInterval,  // scalar interval with lo = -inf or hi = +inf allowed
};

// One element of a subdifferential, together with a symbolic description of
// the whole set so that solvers can project onto it in closed form.
struct SubdifferentialElement {
  Vec2 representative;
  bool is_multivalued = false;
  SubdifferentialSetKind set = SubdifferentialSetKind::Singleton;

  Vec2 center;          // Ball
  double radius = 0.0;  // Ball
  double lo = 0.0;      // Segment / HalfLineInterval (scalar sets use .x)
  double hi = 0.0;

  static SubdifferentialElement singleton(const Vec2& p) {
    SubdifferentialElement e;
    e.representative = p;
    return e;
  }

  static SubdifferentialElement ball(const Vec2& c, double r, const Vec2& rep) {
    SubdifferentialElement e;
    e.representative = rep;
    e.is_multivalued = r > 0.0;
    e.set = SubdifferentialSetKind::Ball;
    e.center = c;
    e.radius = r;
    return e;
  }

  static SubdifferentialElement segment(double a, double b, double rep) {
    SubdifferentialElement e;
    e.representative = {rep, 0.0};
    e.is_multivalued = b > a;
    e.set = SubdifferentialSetKind::Segment;
    e.lo = a;
    e.hi = b;
    return e;
  }

  bool contains(const Vec2& p, double tol = 1e-12) const {
    switch (set) {
      case SubdifferentialSetKind::Singleton:
        return norm(p - representative) <= tol;
      case SubdifferentialSetKind::Ball:
        return norm(p - center) <= radius + tol;
      case SubdifferentialSetKind::Segment:
      case SubdifferentialSetKind::HalfLineInterval:
        return p.x >= lo - tol && p.x <= hi + tol && std::abs(p.y) <= tol;
    }
    return false;
  }

  Vec2 project(const Vec2& p) const {
    switch (set) {
      case SubdifferentialSetKind::Singleton:
        return representative;
      case SubdifferentialSetKind::Ball: {
        const Vec2 d = p - center;
        const double n = norm(d);
        if (n <= radius) return p;
        return center + (radius / n) * d;
      }
      case SubdifferentialSetKind::Segment:
      case SubdifferentialSetKind::HalfLineInterval: {
        double v = p.x;
        if (v < lo) v = lo;
        if (v > hi) v = hi;
        return {v, 0.0};
      }
    }
    return p;
  }
};

}  // namespace shapegrad
