#include "anisomesh/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anisomesh/error_models.hpp"
#include "anisomesh/exact_norms.hpp"
#include "anisomesh/problems.hpp"

namespace anisomesh {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Rect bounds_of(const std::array<Vec2, 3>& t) {
  Rect r{t[0].x, t[0].x, t[0].y, t[0].y};
  for (const Vec2& p : t) {
    r.x0 = std::min(r.x0, p.x);
    r.x1 = std::max(r.x1, p.x);
    r.y0 = std::min(r.y0, p.y);
    r.y1 = std::max(r.y1, p.y);
  }
  return r;
}

TriMesh single_triangle(const std::array<Vec2, 3>& t) {
  return build_mesh({t[0], t[1], t[2]}, {{0, 1, 2}}, {{{0, 1}, 1}, {{1, 2}, 1}, {{2, 0}, 1}});
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Maps a triangle drawn in the stretched frame back through diag(1/sqrt(l1), 1/sqrt(l2)).
std::array<Vec2, 3> unstretch(const std::array<Vec2, 3>& t, double l1, double l2) {
  std::array<Vec2, 3> out{};
  for (int i = 0; i < 3; ++i)
    out[static_cast<std::size_t>(i)] = {t[static_cast<std::size_t>(i)].x / std::sqrt(l1),
                                        t[static_cast<std::size_t>(i)].y / std::sqrt(l2)};
  return out;
}

}  // namespace

std::array<Vec2, 3> random_triangle(std::mt19937_64& rng, double max_aspect) {
  std::array<Vec2, 3> t{};
  for (;;) {
    for (Vec2& p : t) p = {uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)};
    if (std::abs(cross(t[1] - t[0], t[2] - t[0])) > 0.1) break;
  }
  const double aspect = std::exp(uniform(rng, 0.0, std::log(max_aspect)));
  const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double scale = std::exp(uniform(rng, std::log(0.1), std::log(3.0)));
  const Vec2 shift{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
  for (Vec2& p : t) p = shift + scale * rotate(Vec2{p.x, p.y / aspect}, angle);
  if (cross(t[1] - t[0], t[2] - t[0]) < 0.0) std::swap(t[1], t[2]);
  return t;
}

SuiteResult formula_arbitration(std::size_t cases, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  SuiteResult r{"formula_arbitration", 0, 0, 0.0};
  for (std::size_t k = 0; k < cases; ++k) {
    const auto tri = random_triangle(rng, 100.0);
    const Sym2 H{uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)};
    const Vec2 b{uniform(rng, -5, 5), uniform(rng, -5, 5)};
    const ProblemDef prob = quadratic_problem(0.5 * H, b, uniform(rng, -5, 5), bounds_of(tri));
    const TriMesh mesh = single_triangle(tri);
    const ElementGeometry g = element_geometry(mesh, 0);

    const double l2_oracle = std::pow(interp_error_lp(mesh, prob, 2.0).global, 2);
    const double h1_oracle = std::pow(interp_grad_error_lp(mesh, prob, 2.0).global, 2);
    const double d = std::max(rel_diff(l2_error_sq(g, H), l2_oracle), rel_diff(h1_error_sq(g, H), h1_oracle));
    r.worst = std::max(r.worst, d);
    ++r.cases;
    if (!(d <= tol)) ++r.failures;
  }
  return r;
}

SuiteResult linf_arbitration(std::size_t cases, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  SuiteResult r{"linf_arbitration", 0, 0, 0.0};
  for (std::size_t k = 0; k < cases; ++k) {
    const double l1 = std::exp(uniform(rng, std::log(0.01), std::log(100.0)));
    const double l2 = std::exp(uniform(rng, std::log(0.01), std::log(100.0)));
    // acute triangle in the stretched frame: angles drawn away from 90 degrees
    double a = 0, b = 0, c = 0;
    do {
      a = uniform(rng, 0.15, 1.45);
      b = uniform(rng, 0.15, 1.45);
      c = std::numbers::pi - a - b;
    } while (!(c > 0.15 && c < 1.45));
    const double side = std::exp(uniform(rng, std::log(0.05), std::log(2.0)));
    // vertices P0 = 0, P1 = (side, 0), P2 from the angle at P0 (= a) and law of sines
    const double r02 = side * std::sin(b) / std::sin(c);
    std::array<Vec2, 3> s{Vec2{0, 0}, Vec2{side, 0}, Vec2{r02 * std::cos(a), r02 * std::sin(a)}};
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    for (Vec2& p : s) p = rotate(p, angle);
    const auto tri = unstretch(s, l1, l2);
    const ElementGeometry g = make_geometry(tri[0], tri[1], tri[2]);
    const LinfEstimate est = linf_error_ds(g, l1, l2);
    const double exact = element_linf_error_quadratic(g, Sym2::diag(2.0 * l1, 2.0 * l2));
    const double d = rel_diff(est.value, exact);
    r.worst = std::max(r.worst, d);
    ++r.cases;
    if (!est.applicable || !(d <= tol)) ++r.failures;

    // right angle at P0 in the stretched frame
    std::array<Vec2, 3> rt{Vec2{0, 0}, Vec2{side, 0}, Vec2{0, r02}};
    for (Vec2& p : rt) p = rotate(p, angle);
    const auto rtri = unstretch(rt, l1, l2);
    ++r.cases;
    if (linf_error_ds(make_geometry(rtri[0], rtri[1], rtri[2]), l1, l2).applicable) ++r.failures;
  }
  return r;
}

std::vector<double> default_lemma_ps() { return {0.5, 1.0, 1.5, 2.0, 4.0, 10.0, kInfinity}; }

SuiteResult lemma_bounds(std::size_t cases, std::uint64_t seed, const std::vector<double>& ps) {
  std::mt19937_64 rng(seed);
  SuiteResult r{"lemma_bounds", 0, 0, -std::numeric_limits<double>::infinity()};
  OracleOptions tight;
  tight.rel_tol = 1e-9;
  tight.max_depth = 8;
  constexpr double slack = 1e-7;
  const EquivConstants two = norm_equiv_constants(2.0);

  auto check = [&](double lower, double value, double upper) {
    const double over = std::max(lower / value, value / upper) - 1.0;
    r.worst = std::max(r.worst, over);
    ++r.cases;
    if (!(over <= slack)) ++r.failures;
  };

  for (std::size_t k = 0; k < cases; ++k) {
    const auto tri = random_triangle(rng, 20.0);
    const ElementGeometry g = make_geometry(tri[0], tri[1], tri[2]);
    const double area = g.area;

    // non-negative quadratic: c + sum c_ij l_i l_j or a squared affine function
    std::array<double, 6> c{};
    for (double& v : c) v = rng() % 3 == 0 ? 0.0 : uniform(rng, 0.0, 2.0);
    const double c0 = rng() % 2 == 0 ? 0.0 : uniform(rng, 0.0, 1.0);
    const Vec2 grad{uniform(rng, -3, 3), uniform(rng, -3, 3)};
    const Vec2 centre = (1.0 / 3.0) * (tri[0] + tri[1] + tri[2]);
    const double off = uniform(rng, -1.0, 1.0) * norm(grad) * std::sqrt(area);
    const bool square = k % 3 == 2;
    const ScalarField v = [&](const Vec2& x) {
      if (square) {
        const double a = dot(grad, x - centre) + off;
        return a * a + c0;
      }
      const double l1 = cross(tri[2] - tri[0], x - tri[0]) / (-2.0 * area);
      const double l2 = cross(tri[1] - tri[0], x - tri[0]) / (2.0 * area);
      const std::array<double, 3> l{1.0 - l1 - l2, l1, l2};
      return c0 + c[0] * l[0] * l[0] + c[1] * l[1] * l[1] + c[2] * l[2] * l[2] + c[3] * l[0] * l[1] +
             c[4] * l[1] * l[2] + c[5] * l[0] * l[2];
    };
    const double l1norm = integrate_abs_pow(tri, v, 1.0, tight);

    // convex quadratic for the estimate sandwich
    const double e1 = uniform(rng, 0.0, 5.0), e2 = uniform(rng, 0.0, 5.0);
    const Sym2 H = rotate(Sym2::diag(e1, e2), uniform(rng, 0.0, std::numbers::pi));
    const ProblemDef prob = quadratic_problem(0.5 * H, {}, 0.0, bounds_of(tri));
    const TriMesh mesh = single_triangle(tri);

    for (double p : ps) {
      const EquivConstants k = norm_equiv_constants(p);
      const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
      const double vp = lp_norm_on_triangle(tri, v, p, tight);
      const double lower = std::pow(k.c_inv_p, -inv_p) * std::pow(area, inv_p - 1.0) * l1norm;
      const double upper = k.c_p * std::pow(area, inv_p - 1.0) * l1norm;
      if (l1norm > 0.0) check(lower, vp, upper);

      const double est = std::sqrt(lp_error_estimate(g, H, p));
      const double ep = interp_error_lp(mesh, prob, p, tight).global;
      if (est > 0.0) check(std::pow(k.c_inv_p, -inv_p) / two.c_p * est, ep, k.c_p * est);
    }
  }
  return r;
}

}  // namespace anisomesh
