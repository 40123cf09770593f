#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace gazehmm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Symmetric-friendly 2x2 matrix stored row-major.
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [[a, b], [c, d]]

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 isotropic(double v) { return {v, 0.0, 0.0, v}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }

  Mat2 inverse() const {
    const double dt = det();
    if (dt == 0.0) throw std::runtime_error("Mat2: singular matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  friend Mat2 operator+(Mat2 m, Mat2 n) {
    return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
  }
  friend Mat2 operator*(double s, Mat2 m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
};

/// v^T M v
inline double quad_form(const Mat2& m, Vec2 v) {
  return v.x * (m.a * v.x + m.b * v.y) + v.y * (m.c * v.x + m.d * v.y);
}

inline Mat2 outer(Vec2 v) { return {v.x * v.x, v.x * v.y, v.y * v.x, v.y * v.y}; }

/// Eigenvalues of the symmetrized matrix, ascending.
inline std::array<double, 2> sym_eigenvalues(const Mat2& m) {
  const double off = 0.5 * (m.b + m.c);
  const double tr = m.a + m.d;
  const double det = m.a * m.d - off * off;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

/// Eigendecomposition of the symmetrized matrix: returns {lo, hi} eigenvalues
/// and the unit eigenvector of the larger one.
struct SymEig {
  double lo = 0.0;
  double hi = 0.0;
  Vec2 hi_axis{1.0, 0.0};
};

inline SymEig sym_eigen(const Mat2& m) {
  const double off = 0.5 * (m.b + m.c);
  const auto ev = sym_eigenvalues(m);
  SymEig out;
  out.lo = ev[0];
  out.hi = ev[1];
  // (A - hi*I) v = 0
  if (std::abs(off) > 1e-300) {
    Vec2 v{out.hi - m.d, off};
    const double n = norm(v);
    if (n > 0.0) out.hi_axis = {v.x / n, v.y / n};
  } else if (m.d > m.a) {
    out.hi_axis = {0.0, 1.0};
  }
  return out;
}

/// Lower Cholesky factor L with M = L L^T; requires positive definiteness.
struct Chol2 {
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
};

inline Chol2 cholesky(const Mat2& m) {
  const double off = 0.5 * (m.b + m.c);
  if (m.a <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
  Chol2 ch;
  ch.l11 = std::sqrt(m.a);
  ch.l21 = off / ch.l11;
  const double rest = m.d - ch.l21 * ch.l21;
  if (rest <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
  ch.l22 = std::sqrt(rest);
  return ch;
}

}  // namespace gazehmm
