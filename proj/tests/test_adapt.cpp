#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anisomesh/adapt.hpp"

using namespace anisomesh;

TEST(Adapt, SingleIterationGivesOneRecord) {
  AdaptOptions o;
  o.target_elements = 300;
  o.iterations = 1;
  const AdaptReport r = run_adaptation(o);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].iter, 1);
  EXPECT_GT(r.history[0].nbt, 0u);
  EXPECT_EQ(r.history[0].nbt, r.final_mesh.num_triangles());
  EXPECT_EQ(r.final_metric.size(), r.final_mesh.num_vertices());
  EXPECT_DOUBLE_EQ(r.history[0].effective_target, 300.0);
}

TEST(Adapt, CallbackSeesEveryIteration) {
  AdaptOptions o;
  o.problem = quadratic_problem(Sym2::identity());
  o.target_elements = 200;
  o.iterations = 3;
  int calls = 0;
  const AdaptReport r = run_adaptation(o, [&](const IterationRecord& rec) { EXPECT_EQ(rec.iter, ++calls); });
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(r.history.size(), 3u);
}

TEST(Adapt, QuadraticFieldIsEquidistributed) {
  AdaptOptions o;
  o.problem = problem_from_name("quadratic");
  o.target_elements = 1000;
  o.iterations = 5;
  const AdaptReport r = run_adaptation(o);
  EXPECT_LE(r.history.back().cv_equidistribution, 0.3);
  EXPECT_NEAR(static_cast<double>(r.history.back().nbt), 1000.0, 250.0);
}

TEST(Adapt, CircleFrontRunTracksTargetAndReducesError) {
  AdaptOptions o;
  o.problem = circle_problem();
  o.m = 0;
  o.p = 2.0;
  o.target_elements = 4000;
  o.iterations = 15;
  const AdaptReport r = run_adaptation(o);
  ASSERT_EQ(r.history.size(), 15u);
  const auto& first = r.history.front();
  const auto& last = r.history.back();
  EXPECT_NEAR(static_cast<double>(last.nbt), 4000.0, 0.2 * 4000.0);
  for (const IterationRecord& rec : r.history) EXPECT_GT(rec.nbt, 0u);
  // eventually non-increasing error
  double tail_min = last.error_lp;
  for (std::size_t i = r.history.size() - 5; i < r.history.size(); ++i) tail_min = std::min(tail_min, r.history[i].error_lp);
  EXPECT_LE(tail_min, r.history[4].error_lp);
  EXPECT_GE(first.error_lp / last.error_lp, 5.0) << "iteration 1 error " << first.error_lp << ", final " << last.error_lp;
}

TEST(Adapt, DefaultIterationCounts) {
  EXPECT_EQ(default_iterations(ProblemId::circle, 0, 2.0), 15);
  EXPECT_EQ(default_iterations(ProblemId::quadratic, 1, 2.0), 15);
  EXPECT_EQ(default_iterations(ProblemId::zigzag, 1, kInfinity), 20);
  EXPECT_EQ(default_iterations(ProblemId::layers, 0, kInfinity), 20);
  EXPECT_EQ(default_iterations(ProblemId::layers, 1, 2.0), 20);
  EXPECT_EQ(default_iterations(ProblemId::layers, 1, kInfinity), 30);
}

TEST(Adapt, OptionsValidated) {
  AdaptOptions o;
  EXPECT_NO_THROW(validate(o));
  o.target_elements = 5;
  EXPECT_THROW(validate(o), std::invalid_argument);
  o = {};
  o.iterations = -1;
  EXPECT_THROW(validate(o), std::invalid_argument);
  o = {};
  o.m = 2;
  EXPECT_THROW(validate(o), std::invalid_argument);
  o = {};
  o.p = 0.0;
  EXPECT_THROW(validate(o), std::invalid_argument);
  o = {};
  o.alpha = -1.0;
  EXPECT_THROW(validate(o), std::invalid_argument);
  EXPECT_EQ(hessian_source_from_name("recovered"), HessianSource::recovered);
  EXPECT_THROW(hessian_source_from_name("guess"), std::invalid_argument);
}

TEST(Adapt, LogLogFit) {
  const std::vector<double> x{1000, 2000, 4000, 8000};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.75));
  const SlopeFit f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, -0.75, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
  const std::vector<double> one{1.0};
  EXPECT_THROW(fit_loglog(one, one), std::invalid_argument);
}

TEST(Adapt, StudyRejectsBadTargets) {
  AdaptOptions o;
  EXPECT_THROW(convergence_study(o, {1000, 2000}), std::invalid_argument);
  EXPECT_THROW(convergence_study(o, {1000, 4000, 2000}), std::invalid_argument);
}

TEST(Adapt, QuadraticStudyHasSecondOrderRate) {
  AdaptOptions o;
  o.problem = problem_from_name("quadratic");
  o.iterations = 4;
  o.measure_every_iteration = false;
  const StudyResult s = convergence_study(o, {500, 1000, 2000, 4000});
  EXPECT_GE(s.fit.slope, -1.1);
  EXPECT_LE(s.fit.slope, -0.9);
  EXPECT_EQ(s.errors.size(), 4u);
}

TEST(Adapt, LayerConcentrationOnUniformMesh) {
  const ProblemDef z = zigzag_problem();
  const TriMesh m = structured_rect_mesh(z.domain, 100, 100);
  const auto dist = [&](const Vec2& p) { return feature_distance(z, p); };
  // tube area 2 delta L over the domain area, L the curve length x = sin(5y)/2 on [-1, 1]
  const double delta = 0.05;
  double len = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double y = -1.0 + (i + 0.5) * 2.0 / n;
    len += std::hypot(1.0, 2.5 * std::cos(5.0 * y)) * 2.0 / n;
  }
  EXPECT_NEAR(layer_concentration(m, dist, delta), 2.0 * delta * len / 4.0, 0.02);
  EXPECT_DOUBLE_EQ(layer_concentration(m, dist, 3.0), 1.0);
  EXPECT_THROW(layer_concentration(m, dist, 0.0), std::invalid_argument);
}

TEST(Adapt, EquidistributionOfUniformMeshUnderConstantHessian) {
  const TriMesh m = structured_rect_mesh({0, 1, 0, 1}, 6, 6);
  const std::vector<Sym2> h(m.num_vertices(), Sym2::diag(2, 2));
  EXPECT_NEAR(equidistribution_cv(m, h, 0, 2.0), 0.0, 1e-12);
  EXPECT_NEAR(equidistribution_cv(m, h, 1, kInfinity), 0.0, 1e-12);
}
