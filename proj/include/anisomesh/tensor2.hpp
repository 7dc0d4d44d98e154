#pragma once

// Small fixed-size 2D vector and symmetric 2x2 tensor types.

#include <algorithm>
#include <array>
#include <cmath>

namespace anisomesh {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm_squared(const Vec2& a) { return dot(a, a); }

/// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static constexpr Sym2 identity(double s = 1.0) { return {s, 0.0, s}; }
  static constexpr Sym2 diag(double a, double b) { return {a, 0.0, b}; }

  constexpr Sym2& operator+=(const Sym2& o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
  constexpr Sym2& operator-=(const Sym2& o) {
    xx -= o.xx;
    xy -= o.xy;
    yy -= o.yy;
    return *this;
  }
  constexpr Sym2& operator*=(double s) {
    xx *= s;
    xy *= s;
    yy *= s;
    return *this;
  }
  friend constexpr bool operator==(const Sym2&, const Sym2&) = default;
};

constexpr Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
constexpr Sym2 operator-(Sym2 a, const Sym2& b) { return a -= b; }
constexpr Sym2 operator*(double s, Sym2 a) { return a *= s; }
constexpr Sym2 operator*(Sym2 a, double s) { return a *= s; }

constexpr Vec2 operator*(const Sym2& m, const Vec2& v) {
  return {m.xx * v.x + m.xy * v.y, m.xy * v.x + m.yy * v.y};
}

constexpr double det(const Sym2& m) { return m.xx * m.yy - m.xy * m.xy; }
constexpr double trace(const Sym2& m) { return m.xx + m.yy; }
/// a . M b
constexpr double bilinear(const Vec2& a, const Sym2& m, const Vec2& b) { return dot(a, m * b); }
/// v . M v
constexpr double quad_form(const Sym2& m, const Vec2& v) { return bilinear(v, m, v); }

inline double max_abs_entry(const Sym2& m) {
  return std::max({std::abs(m.xx), std::abs(m.xy), std::abs(m.yy)});
}

/// Eigen-decomposition M = R diag(l1, l2) R^T with l1 >= l2 and R = [v1 v2].
struct SymEigen {
  double l1 = 0.0;
  double l2 = 0.0;
  Vec2 v1{1.0, 0.0};
  Vec2 v2{0.0, 1.0};
};

inline SymEigen eigen(const Sym2& m) {
  const double mean = 0.5 * (m.xx + m.yy);
  const double half_diff = 0.5 * (m.xx - m.yy);
  const double r = std::hypot(half_diff, m.xy);
  const double angle = 0.5 * std::atan2(m.xy, half_diff);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {mean + r, mean - r, {c, s}, {-s, c}};
}

/// R diag(f1, f2) R^T for a decomposition from eigen().
inline Sym2 compose(const SymEigen& e, double f1, double f2) {
  const double c = e.v1.x;
  const double s = e.v1.y;
  return {f1 * c * c + f2 * s * s, (f1 - f2) * c * s, f1 * s * s + f2 * c * c};
}

/// Applies a scalar function to the eigenvalues.
template <typename F>
Sym2 spectral_map(const Sym2& m, F&& f) {
  const SymEigen e = eigen(m);
  return compose(e, f(e.l1), f(e.l2));
}

inline bool is_spd(const Sym2& m) {
  return std::isfinite(m.xx) && std::isfinite(m.xy) && std::isfinite(m.yy) && m.xx > 0.0 &&
         det(m) > 0.0;
}

inline Sym2 log_spd(const Sym2& m) {
  return spectral_map(m, [](double l) { return std::log(l); });
}
inline Sym2 exp_sym(const Sym2& m) {
  return spectral_map(m, [](double l) { return std::exp(l); });
}
inline Sym2 sqrt_spd(const Sym2& m) {
  return spectral_map(m, [](double l) { return std::sqrt(l); });
}

/// Q^T M Q for Q = [[c, -s], [s, c]].
inline Sym2 rotate(const Sym2& m, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // columns of Q
  const Vec2 q1{c, s};
  const Vec2 q2{-s, c};
  return {quad_form(m, q1), bilinear(q1, m, q2), quad_form(m, q2)};
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace anisomesh
