#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "anisomesh/problems.hpp"

using namespace anisomesh;

namespace {

std::vector<ProblemDef> all_problems() {
  return {circle_problem(), zigzag_problem(), layers_problem(), layers_problem(0.05),
          quadratic_problem({1.0, -0.5, 2.0}, {0.3, -1.0}, 0.7)};
}

Vec2 random_interior(std::mt19937_64& rng, const Rect& d) {
  std::uniform_real_distribution<double> ux(d.x0 + 0.02 * d.width(), d.x1 - 0.02 * d.width());
  std::uniform_real_distribution<double> uy(d.y0 + 0.02 * d.height(), d.y1 - 0.02 * d.height());
  return {ux(rng), uy(rng)};
}

/// Best central difference over a sweep of steps; layer fields need smaller
/// steps than the smooth ones.
double fd_agreement(const std::function<double(double)>& f, double exact) {
  double best = std::numeric_limits<double>::infinity();
  for (double h : {1e-4, 3e-5, 1e-5, 3e-6, 1e-6}) {
    const double d = (f(h) - f(-h)) / (2.0 * h);
    best = std::min(best, std::abs(d - exact) / std::max(1.0, std::abs(exact)));
  }
  return best;
}

}  // namespace

TEST(Problems, QuadraticExample) {
  const FieldSample s = eval(problem_from_name("quadratic"), {0.3, 0.4});
  EXPECT_NEAR(s.value, 0.25, 1e-15);
  EXPECT_NEAR(s.gradient.x, 0.6, 1e-15);
  EXPECT_NEAR(s.gradient.y, 0.8, 1e-15);
  EXPECT_EQ(s.hessian, Sym2::diag(2, 2));
}

TEST(Problems, CircleIsOneHalfOnTheFront) {
  const double r = 0.8;
  for (double t : {0.2, 0.7850, 1.3}) {
    const Vec2 p{r * std::cos(t), r * std::sin(t)};
    if (!circle_problem().domain.contains(p)) continue;
    EXPECT_NEAR(eval(circle_problem(), p).value, 0.5, 1e-14);
  }
}

TEST(Problems, LayersMatchesTermByTermSum) {
  const double eps = 0.01;
  const ProblemDef prob = layers_problem(eps);
  for (const Vec2 p : {Vec2{1.2, 1.2}, Vec2{-1.2, 1.2}, Vec2{0.31, -0.02}, Vec2{0.6, 0.0}}) {
    double direct = 0.0;
    for (double c : {0.0, -0.6, 0.6, -1.2, 1.2}) {
      direct += 1.0 / (1.0 + std::exp((p.x + p.y - c) / (2.0 * eps)));
      direct += 1.0 / (1.0 + std::exp((p.x - p.y - c) / (2.0 * eps)));
    }
    EXPECT_NEAR(eval(prob, p).value, direct, 1e-13) << p.x << "," << p.y;
  }
}

TEST(Problems, ZigzagMatchesDirectFormula) {
  for (const Vec2 p : {Vec2{0.1, 0.2}, Vec2{-0.7, 0.9}, Vec2{0.0, 0.0}}) {
    const double direct = p.x * p.x * p.y + p.y * p.y * p.y + std::tanh(10.0 * (std::sin(5.0 * p.y) - 2.0 * p.x));
    EXPECT_NEAR(eval(zigzag_problem(), p).value, direct, 1e-14);
  }
}

TEST(Problems, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (const ProblemDef& prob : all_problems()) {
    for (int k = 0; k < 100; ++k) {
      const Vec2 p = random_interior(rng, prob.domain);
      const FieldSample s = eval(prob, p);
      auto val = [&](Vec2 d) { return value_unchecked(prob, p + d); };
      auto grad = [&](Vec2 d) { return eval_unchecked(prob, p + d).gradient; };
      EXPECT_LE(fd_agreement([&](double h) { return val({h, 0}); }, s.gradient.x), 1e-5) << to_string(prob.id);
      EXPECT_LE(fd_agreement([&](double h) { return val({0, h}); }, s.gradient.y), 1e-5) << to_string(prob.id);
      EXPECT_LE(fd_agreement([&](double h) { return grad({h, 0}).x; }, s.hessian.xx), 1e-5) << to_string(prob.id);
      EXPECT_LE(fd_agreement([&](double h) { return grad({h, 0}).y; }, s.hessian.xy), 1e-5) << to_string(prob.id);
      EXPECT_LE(fd_agreement([&](double h) { return grad({0, h}).y; }, s.hessian.yy), 1e-5) << to_string(prob.id);
    }
  }
}

TEST(Problems, CircleHessianIsRadialOnTheDiagonal) {
  auto radial_alignment = [](const Vec2& v, const Vec2& p) { return std::abs(dot(v, p)) / (norm(v) * norm(p)); };
  // On the front the radial second derivative vanishes (logistic inflection): the
  // eigenbasis is still radial/tangential, with the radial eigenvalue zero.
  const Vec2 p{0.8 / std::sqrt(2.0), 0.8 / std::sqrt(2.0)};
  const SymEigen e = eigen(eval(circle_problem(), p).hessian);
  EXPECT_NEAR(std::max(radial_alignment(e.v1, p), radial_alignment(e.v2, p)), 1.0, 1e-8);
  // Just inside the front the radial curvature dominates.
  const Vec2 q{0.795 / std::sqrt(2.0), 0.795 / std::sqrt(2.0)};
  const SymEigen f = eigen(eval(circle_problem(), q).hessian);
  const Vec2 big = std::abs(f.l1) >= std::abs(f.l2) ? f.v1 : f.v2;
  EXPECT_NEAR(radial_alignment(big, q), 1.0, 1e-8);
}

TEST(Problems, ZigzagCurvatureConcentratesOnTheCurve) {
  auto largest = [](const Sym2& h) {
    const SymEigen e = eigen(h);
    return std::max(std::abs(e.l1), std::abs(e.l2));
  };
  // (0, 0) is the inflection of the tanh front and every second derivative is zero there.
  EXPECT_EQ(largest(eval(zigzag_problem(), {0, 0}).hessian), 0.0);
  // The largest curvature across the front sits at 10 (sin 5y - 2x) = +-atanh(1/sqrt 3).
  const double x = -std::atanh(1.0 / std::sqrt(3.0)) / 20.0;
  EXPECT_GE(largest(eval(zigzag_problem(), {x, 0}).hessian), 10.0 * largest(eval(zigzag_problem(), {0.9, 0.9}).hessian));
}

TEST(Problems, QuadraticHessianFieldIsConstant) {
  const Sym2 A{1.5, 0.25, -0.5};
  const ProblemDef q = quadratic_problem(A, {1, 2}, 3, {0, 2, 0, 1});
  for (const Sym2& h : hessian_analytic_field(q, structured_rect_mesh(q.domain, 4, 3))) EXPECT_EQ(h, 2.0 * A);
}

TEST(Problems, DomainIsEnforced) {
  EXPECT_THROW(eval(circle_problem(), {0.05, 0.5}), DomainError);
  EXPECT_NO_THROW(eval(circle_problem(), {0.1, 1.0}));
  EXPECT_THROW(problem_from_name("nope"), std::invalid_argument);
  EXPECT_THROW(layers_problem(0.0), std::invalid_argument);
}

TEST(Problems, FeatureDistances) {
  EXPECT_NEAR(feature_distance(circle_problem(), {0.6, 0.8}), 0.2, 1e-15);
  EXPECT_NEAR(feature_distance(zigzag_problem(), {0.5 * std::sin(5 * 0.3), 0.3}), 0.0, 1e-9);
  EXPECT_NEAR(feature_distance(zigzag_problem(), {0.5 * std::sin(5 * 0.3) + 0.01, 0.3}), 0.01 / std::hypot(1.0, 2.5 * std::cos(1.5)), 1e-4);
  EXPECT_NEAR(feature_distance(layers_problem(), {0.3, 0.3}), 0.0, 1e-15);
  EXPECT_NEAR(feature_distance(layers_problem(), {0.1, 0.0}), 0.1 / std::sqrt(2.0), 1e-15);
}
