#include "anisomesh/exact_norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anisomesh/parallel.hpp"
#include "anisomesh/quadrature.hpp"

namespace anisomesh {

namespace {

using Bary = std::array<double, 3>;
using SubTri = std::array<Bary, 3>;

Bary mix(const Bary& a, const Bary& b) {
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
}

std::array<SubTri, 4> split(const SubTri& s) {
  const Bary m01 = mix(s[0], s[1]);
  const Bary m12 = mix(s[1], s[2]);
  const Bary m20 = mix(s[2], s[0]);
  return {SubTri{s[0], m01, m20}, SubTri{m01, s[1], m12}, SubTri{m20, m12, s[2]},
          SubTri{m01, m12, m20}};
}

double pow_abs(double v, double p) {
  const double a = std::abs(v);
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  if (p == 4.0) return (a * a) * (a * a);
  return std::pow(a, p);
}

/// Mean of g over the sub-triangle times its area fraction.
template <typename G>
double apply_rule(const SubTri& s, double frac, const QuadratureRule& rule, G& g) {
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& mu = rule.points[q];
    const Bary lam{mu[0] * s[0][0] + mu[1] * s[1][0] + mu[2] * s[2][0],
                   mu[0] * s[0][1] + mu[1] * s[1][1] + mu[2] * s[2][1],
                   mu[0] * s[0][2] + mu[1] * s[1][2] + mu[2] * s[2][2]};
    acc += rule.weights[q] * g(lam);
  }
  return acc * frac;
}

template <typename G>
class AdaptiveIntegrator {
 public:
  AdaptiveIntegrator(G& g, const OracleOptions& o)
      : g_(g), rule_(triangle_rule(o.degree)), rel_tol_(o.rel_tol), max_depth_(o.max_depth) {}

  /// Integral of g over the reference element divided by the element area.
  double run() {
    const SubTri root{Bary{1.0, 0.0, 0.0}, Bary{0.0, 1.0, 0.0}, Bary{0.0, 0.0, 1.0}};
    const double whole = apply_rule(root, 1.0, rule_, g_);
    if (max_depth_ <= 0) return whole;
    const auto kids = split(root);
    std::array<double, 4> vals{};
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += vals[k] = apply_rule(kids[k], 0.25, rule_, g_);
    tol_ = rel_tol_ * std::max(std::abs(sum), std::abs(whole));
    if (std::abs(sum - whole) <= tol_ || max_depth_ <= 1) return sum;
    double total = 0.0;
    for (int k = 0; k < 4; ++k) total += refine(kids[k], vals[k], 0.25, 2);
    return total;
  }

 private:
  double refine(const SubTri& s, double parent, double frac, int depth) {
    const auto kids = split(s);
    std::array<double, 4> vals{};
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += vals[k] = apply_rule(kids[k], 0.25 * frac, rule_, g_);
    if (depth >= max_depth_ || std::abs(sum - parent) <= tol_ * frac) return sum;
    double total = 0.0;
    for (int k = 0; k < 4; ++k) total += refine(kids[k], vals[k], 0.25 * frac, depth + 1);
    return total;
  }

  G& g_;
  const QuadratureRule& rule_;
  double rel_tol_;
  int max_depth_;
  double tol_ = 0.0;
};

Bary clamp_bary(Bary b) {
  double s = 0.0;
  for (double& v : b) {
    v = std::max(0.0, v);
    s += v;
  }
  for (double& v : b) v /= s;
  return b;
}

/// Max of g over the reference element: lattice, sub-centroids, then zoom.
template <typename G>
std::pair<double, Bary> sample_max(G& g, int n) {
  n = std::max(1, n);
  double best = -1.0;
  Bary best_at{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  auto consider = [&](const Bary& b) {
    const double v = g(b);
    if (v > best) {
      best = v;
      best_at = b;
    }
  };
  const double h = 1.0 / n;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      consider({1.0 - (i + j) * h, i * h, j * h});
      if (i + j < n) {
        consider({1.0 - (i + j + 2.0 / 3.0) * h, (i + 1.0 / 3.0) * h, (j + 1.0 / 3.0) * h});
        if (i + j + 1 < n)
          consider({1.0 - (i + j + 4.0 / 3.0) * h, (i + 2.0 / 3.0) * h, (j + 2.0 / 3.0) * h});
      }
    }
  }
  double r = h;
  for (int round = 0; round < 8; ++round) {
    const Bary c = best_at;
    for (int a = -2; a <= 2; ++a) {
      for (int b = -2; b <= 2; ++b) {
        if (a == 0 && b == 0) continue;
        const double d1 = 0.5 * r * a;
        const double d2 = 0.5 * r * b;
        consider(clamp_bary({c[0] - d1 - d2, c[1] + d1, c[2] + d2}));
      }
    }
    r *= 0.5;
  }
  return {best, best_at};
}

struct ElementData {
  std::array<Vec2, 3> p;
  std::array<double, 3> u;
  Vec2 grad_interp;
  double area;
};

Vec2 at(const ElementData& e, const Bary& l) {
  return {l[0] * e.p[0].x + l[1] * e.p[1].x + l[2] * e.p[2].x,
          l[0] * e.p[0].y + l[1] * e.p[1].y + l[2] * e.p[2].y};
}

ElementData element_data(const TriMesh& mesh, Index t, const std::vector<double>& u) {
  ElementData e;
  const Triangle& tri = mesh.triangle(t);
  for (int i = 0; i < 3; ++i) {
    e.p[i] = mesh.vertex(tri[i]);
    e.u[i] = u[static_cast<std::size_t>(tri[i])];
  }
  const ElementGeometry g = make_geometry(e.p[0], e.p[1], e.p[2]);
  e.area = g.area;
  // grad(lambda_i) = perp(edge_i) / (2 |K|), perp(v) = (v.y, -v.x)
  e.grad_interp = {};
  for (int i = 0; i < 3; ++i)
    e.grad_interp += (e.u[i] / (2.0 * g.area)) * Vec2{-g.edge[i].y, g.edge[i].x};
  return e;
}

/// One Newton step toward the stationary point of e = u - u_I from the
/// sampled maximizer; kept only if it stays in K and increases |e|.
double newton_polish(const ProblemDef& problem, const ElementData& e, const Bary& start, double best) {
  Vec2 x = at(e, start);
  const FieldSample f = eval_unchecked(problem, x);
  const Vec2 g = f.gradient - e.grad_interp;
  const double d = det(f.hessian);
  if (std::abs(d) <= 1e-300) return best;
  const Sym2& H = f.hessian;
  const Vec2 step{(H.yy * g.x - H.xy * g.y) / d, (-H.xy * g.x + H.xx * g.y) / d};
  x -= step;
  const double a2 = 2.0 * e.area;
  const Vec2 d0 = x - e.p[0];
  const double l1 = cross(d0, e.p[2] - e.p[0]) / a2;
  const double l2 = cross(e.p[1] - e.p[0], d0) / a2;
  const double l0 = 1.0 - l1 - l2;
  if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) return best;
  const double v = std::abs(value_unchecked(problem, x) - (l0 * e.u[0] + l1 * e.u[1] + l2 * e.u[2]));
  return std::max(best, v);
}

ErrorBreakdown finish(double p, std::vector<double> per) {
  ErrorBreakdown out;
  out.p = p;
  if (std::isinf(p)) {
    out.global = per.empty() ? 0.0 : *std::max_element(per.begin(), per.end());
  } else {
    double s = 0.0;
    for (double v : per) s += v;
    out.global = std::pow(s, 1.0 / p);
  }
  out.per_element = std::move(per);
  return out;
}

std::vector<double> vertex_values(const TriMesh& mesh, const ProblemDef& problem) {
  return sample_values(problem, mesh);  // domain-checked
}

}  // namespace

void require_valid_p(double p) {
  if (std::isnan(p) || !(p > 0.0)) throw std::invalid_argument("p must lie in (0, inf]");
}

ErrorBreakdown interp_error_lp(const TriMesh& mesh, const ProblemDef& problem, double p,
                               const OracleOptions& options) {
  require_valid_p(p);
  const std::vector<double> u = vertex_values(mesh, problem);
  std::vector<double> per(mesh.num_triangles(), 0.0);
  parallel_for(mesh.num_triangles(), [&](std::size_t t) {
    const ElementData e = element_data(mesh, static_cast<Index>(t), u);
    auto err = [&](const Bary& l) {
      return value_unchecked(problem, at(e, l)) - (l[0] * e.u[0] + l[1] * e.u[1] + l[2] * e.u[2]);
    };
    if (std::isinf(p)) {
      auto g = [&](const Bary& l) { return std::abs(err(l)); };
      const auto [best, where] = sample_max(g, options.sample_divisions);
      per[t] = newton_polish(problem, e, where, best);
    } else {
      auto g = [&](const Bary& l) { return pow_abs(err(l), p); };
      AdaptiveIntegrator<decltype(g)> integ(g, options);
      per[t] = integ.run() * e.area;
    }
  });
  return finish(p, std::move(per));
}

ErrorBreakdown interp_grad_error_lp(const TriMesh& mesh, const ProblemDef& problem, double p,
                                    const OracleOptions& options) {
  require_valid_p(p);
  const std::vector<double> u = vertex_values(mesh, problem);
  std::vector<double> per(mesh.num_triangles(), 0.0);
  parallel_for(mesh.num_triangles(), [&](std::size_t t) {
    const ElementData e = element_data(mesh, static_cast<Index>(t), u);
    auto grad_norm = [&](const Bary& l) {
      return norm(eval_unchecked(problem, at(e, l)).gradient - e.grad_interp);
    };
    if (std::isinf(p)) {
      per[t] = sample_max(grad_norm, options.sample_divisions).first;
    } else {
      auto g = [&](const Bary& l) { return pow_abs(grad_norm(l), p); };
      AdaptiveIntegrator<decltype(g)> integ(g, options);
      per[t] = integ.run() * e.area;
    }
  });
  return finish(p, std::move(per));
}

double element_linf_error_quadratic(const ElementGeometry& geom, const Sym2& H) {
  if (!(geom.area > 0.0) || !std::isfinite(geom.area))
    throw std::invalid_argument("degenerate element geometry");
  // Along an edge e vanishes at both ends: e(t) = -(1/2) l.H l t (1 - t).
  double best = 0.0;
  for (const Vec2& l : geom.edge) best = std::max(best, 0.125 * std::abs(quad_form(H, l)));

  // Local frame with vertex 0 at the origin: p1 = edge[2], p2 = -edge[1].
  const Vec2 p1 = geom.edge[2];
  const Vec2 p2 = -geom.edge[1];
  // e(x) = 1/2 x.Hx + g.x with e(p1) = e(p2) = 0
  const double r1 = -0.5 * quad_form(H, p1);
  const double r2 = -0.5 * quad_form(H, p2);
  const double dm = cross(p1, p2);
  const Vec2 g{(r1 * p2.y - r2 * p1.y) / dm, (p1.x * r2 - p2.x * r1) / dm};
  const double dH = det(H);
  const double scale = max_abs_entry(H);
  if (scale > 0.0 && std::abs(dH) > 1e-14 * scale * scale) {
    const Vec2 x{-(H.yy * g.x - H.xy * g.y) / dH, -(-H.xy * g.x + H.xx * g.y) / dH};
    const double l1 = cross(x, p2) / dm;
    const double l2 = cross(p1, x) / dm;
    if (l1 >= 0.0 && l2 >= 0.0 && l1 + l2 <= 1.0)
      best = std::max(best, std::abs(0.5 * quad_form(H, x) + dot(g, x)));
  }
  return best;
}

double integrate_abs_pow(const std::array<Vec2, 3>& tri, const ScalarField& f, double p,
                         const OracleOptions& options) {
  require_valid_p(p);
  if (std::isinf(p)) throw std::invalid_argument("integrate_abs_pow needs finite p");
  const double area = 0.5 * std::abs(cross(tri[1] - tri[0], tri[2] - tri[0]));
  auto g = [&](const Bary& l) {
    const Vec2 x{l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                 l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y};
    return pow_abs(f(x), p);
  };
  AdaptiveIntegrator<decltype(g)> integ(g, options);
  return integ.run() * area;
}

double max_abs_sampled(const std::array<Vec2, 3>& tri, const ScalarField& f, const OracleOptions& options) {
  auto g = [&](const Bary& l) {
    const Vec2 x{l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                 l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y};
    return std::abs(f(x));
  };
  return sample_max(g, options.sample_divisions).first;
}

double lp_norm_on_triangle(const std::array<Vec2, 3>& tri, const ScalarField& f, double p,
                           const OracleOptions& options) {
  require_valid_p(p);
  if (std::isinf(p)) return max_abs_sampled(tri, f, options);
  return std::pow(integrate_abs_pow(tri, f, p, options), 1.0 / p);
}

}  // namespace anisomesh
