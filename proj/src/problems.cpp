#include "anisomesh/problems.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>

namespace anisomesh {

namespace {

constexpr std::array<double, 5> kLayerOffsets{0.0, -0.6, 0.6, -1.2, 1.2};

struct Logistic {
  double s;    // 1 / (1 + e^{-z})
  double ds;   // s (1 - s)
  double d2s;  // s (1 - s) (1 - 2 s)
};

Logistic logistic(double z) {
  const double e = std::exp(-std::abs(z));
  const double s_pos = 1.0 / (1.0 + e);  // logistic(|z|)
  const double s = z >= 0.0 ? s_pos : e * s_pos;
  const double ds = e * s_pos * s_pos;
  return {s, ds, ds * (1.0 - 2.0 * s)};
}

Sym2 outer(const Vec2& a) { return {a.x * a.x, a.x * a.y, a.y * a.y}; }

FieldSample eval_circle(const Vec2& p) {
  const double r = std::hypot(p.x, p.y);
  const Vec2 n{p.x / r, p.y / r};
  const Logistic l = logistic(200.0 * (r - 0.8));
  FieldSample f;
  f.value = l.s;
  f.gradient = (200.0 * l.ds) * n;
  f.hessian = (200.0 * 200.0 * l.d2s) * outer(n) + (200.0 * l.ds / r) * (Sym2::identity() - outer(n));
  return f;
}

FieldSample eval_zigzag(const Vec2& p) {
  const double x = p.x;
  const double y = p.y;
  const double s5 = std::sin(5.0 * y);
  const double c5 = std::cos(5.0 * y);
  const double t = std::tanh(10.0 * (s5 - 2.0 * x));
  const double dt = 1.0 - t * t;
  const double d2t = -2.0 * t * dt;
  const double wx = -20.0;
  const double wy = 50.0 * c5;
  const double wyy = -250.0 * s5;
  FieldSample f;
  f.value = x * x * y + y * y * y + t;
  f.gradient = {2.0 * x * y + dt * wx, x * x + 3.0 * y * y + dt * wy};
  f.hessian = {2.0 * y + d2t * wx * wx, 2.0 * x + d2t * wx * wy, 6.0 * y + d2t * wy * wy + dt * wyy};
  return f;
}

FieldSample eval_layers(const Vec2& p, double eps) {
  FieldSample f;
  const double k = 1.0 / (2.0 * eps);
  for (int family = 0; family < 2; ++family) {
    const Vec2 dz = family == 0 ? Vec2{k, k} : Vec2{k, -k};
    const double w = family == 0 ? p.x + p.y : p.x - p.y;
    for (double off : kLayerOffsets) {
      // (1 + e^z)^{-1} = logistic(-z)
      const Logistic l = logistic(-(w - off) * k);
      f.value += l.s;
      f.gradient -= l.ds * dz;
      f.hessian += l.d2s * outer(dz);
    }
  }
  return f;
}

FieldSample eval_quadratic(const ProblemDef& q, const Vec2& p) {
  FieldSample f;
  f.value = quad_form(q.A, p) + dot(q.b, p) + q.c;
  f.gradient = 2.0 * (q.A * p) + q.b;
  f.hessian = 2.0 * q.A;
  return f;
}

double zigzag_distance(const Vec2& p) {
  // curve: x = sin(5 t) / 2, y = t, t in [-1, 1]
  auto dist2 = [&](double t) {
    const double dx = p.x - 0.5 * std::sin(5.0 * t);
    const double dy = p.y - t;
    return dx * dx + dy * dy;
  };
  constexpr int n = 400;
  double best_t = -1.0;
  double best = dist2(best_t);
  for (int i = 1; i <= n; ++i) {
    const double t = -1.0 + 2.0 * i / n;
    const double d = dist2(t);
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  // golden-section refinement on the bracketing cell
  double a = std::max(-1.0, best_t - 2.0 / n);
  double b = std::min(1.0, best_t + 2.0 / n);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (dist2(c) < dist2(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return std::sqrt(std::min(best, dist2(0.5 * (a + b))));
}

}  // namespace

const char* to_string(ProblemId id) {
  switch (id) {
    case ProblemId::circle: return "circle";
    case ProblemId::zigzag: return "zigzag";
    case ProblemId::layers: return "layers";
    case ProblemId::quadratic: return "quadratic";
  }
  return "unknown";
}

ProblemDef circle_problem() {
  ProblemDef p;
  p.id = ProblemId::circle;
  p.domain = {0.1, 1.0, 0.1, 1.0};
  return p;
}

ProblemDef zigzag_problem() {
  ProblemDef p;
  p.id = ProblemId::zigzag;
  p.domain = {-1.0, 1.0, -1.0, 1.0};
  return p;
}

ProblemDef layers_problem(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("layers problem requires eps > 0");
  ProblemDef p;
  p.id = ProblemId::layers;
  p.domain = {-1.2, 1.2, -1.2, 1.2};
  p.eps = eps;
  return p;
}

ProblemDef quadratic_problem(const Sym2& A, const Vec2& b, double c, const Rect& domain) {
  ProblemDef p;
  p.id = ProblemId::quadratic;
  p.domain = domain;
  p.A = A;
  p.b = b;
  p.c = c;
  return p;
}

ProblemDef problem_from_name(const std::string& name) {
  if (name == "circle") return circle_problem();
  if (name == "zigzag") return zigzag_problem();
  if (name == "layers") return layers_problem();
  if (name == "quadratic") return quadratic_problem(Sym2::identity());
  throw std::invalid_argument("unknown problem '" + name + "'");
}

FieldSample eval_unchecked(const ProblemDef& problem, const Vec2& point) {
  switch (problem.id) {
    case ProblemId::circle: return eval_circle(point);
    case ProblemId::zigzag: return eval_zigzag(point);
    case ProblemId::layers: return eval_layers(point, problem.eps);
    case ProblemId::quadratic: return eval_quadratic(problem, point);
  }
  return {};
}

double value_unchecked(const ProblemDef& problem, const Vec2& point) {
  return eval_unchecked(problem, point).value;
}

FieldSample eval(const ProblemDef& problem, const Vec2& point) {
  const double tol = 1e-12 * std::max(problem.domain.width(), problem.domain.height());
  if (!problem.domain.contains(point, tol))
    throw DomainError("point (" + std::to_string(point.x) + ", " + std::to_string(point.y) +
                      ") lies outside the domain of problem '" + to_string(problem.id) + "'");
  return eval_unchecked(problem, point);
}

std::vector<Sym2> hessian_analytic_field(const ProblemDef& problem, const TriMesh& mesh) {
  std::vector<Sym2> out;
  out.reserve(mesh.num_vertices());
  for (const Vec2& p : mesh.vertices()) out.push_back(eval(problem, p).hessian);
  return out;
}

std::vector<double> sample_values(const ProblemDef& problem, const TriMesh& mesh) {
  std::vector<double> out;
  out.reserve(mesh.num_vertices());
  for (const Vec2& p : mesh.vertices()) out.push_back(eval(problem, p).value);
  return out;
}

double feature_distance(const ProblemDef& problem, const Vec2& point) {
  switch (problem.id) {
    case ProblemId::circle: return std::abs(std::hypot(point.x, point.y) - 0.8);
    case ProblemId::zigzag: return zigzag_distance(point);
    case ProblemId::layers: {
      double d = std::numeric_limits<double>::infinity();
      for (double off : kLayerOffsets) {
        d = std::min(d, std::abs(point.x + point.y - off) / std::sqrt(2.0));
        d = std::min(d, std::abs(point.x - point.y - off) / std::sqrt(2.0));
      }
      return d;
    }
    case ProblemId::quadratic: break;
  }
  throw std::invalid_argument("problem has no characteristic curve");
}

}  // namespace anisomesh
