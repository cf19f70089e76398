#pragma once

#include <cmath>

namespace shapegrad {

// Fixed-size 2-vector used for both 1D and 2D problems; 1D data keeps y = 0,
// which makes dot/norm/tensor algebra dimension-agnostic.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  Mat2& operator+=(const Mat2& o) { a += o.a; b += o.b; c += o.c; d += o.d; return *this; }
  Mat2& operator-=(const Mat2& o) { a -= o.a; b -= o.b; c -= o.c; d -= o.d; return *this; }
  Mat2& operator*=(double s) { a *= s; b *= s; c *= s; d *= s; return *this; }
};

inline Mat2 operator+(Mat2 m, const Mat2& n) { return m += n; }
inline Mat2 operator-(Mat2 m, const Mat2& n) { return m -= n; }
inline Mat2 operator*(double s, Mat2 m) { return m *= s; }

inline Mat2 identity2() { return {1.0, 0.0, 0.0, 1.0}; }

inline Vec2 matvec(const Mat2& m, const Vec2& v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline Mat2 transpose(const Mat2& m) { return {m.a, m.c, m.b, m.d}; }

inline Mat2 matmul(const Mat2& m, const Mat2& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

inline double det(const Mat2& m) { return m.a * m.d - m.b * m.c; }

inline double trace(const Mat2& m) { return m.a + m.d; }

inline Mat2 inverse(const Mat2& m) {
  const double dt = det(m);
  return {m.d / dt, -m.b / dt, -m.c / dt, m.a / dt};
}

// a (x) b, the rank-one matrix a_i b_j.
inline Mat2 outer(const Vec2& a, const Vec2& b) {
  return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
}

// Frobenius pairing A : B.
inline double ddot(const Mat2& m, const Mat2& n) {
  return m.a * n.a + m.b * n.b + m.c * n.c + m.d * n.d;
}

inline double frob2(const Mat2& m) { return ddot(m, m); }

// Spectral norm of a 2x2 matrix (largest singular value).
inline double spectral_norm(const Mat2& m) {
  const Mat2 g = matmul(transpose(m), m);
  const double tr = trace(g);
  const double dt = det(g);
  const double disc = std::max(0.0, tr * tr - 4.0 * dt);
  return std::sqrt(std::max(0.0, 0.5 * (tr + std::sqrt(disc))));
}

}  // namespace shapegrad
