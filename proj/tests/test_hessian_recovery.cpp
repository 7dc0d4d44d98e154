#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "anisomesh/hessian_recovery.hpp"
#include "anisomesh/problems.hpp"

using namespace anisomesh;

namespace {

std::vector<double> sample(const TriMesh& m, const std::function<double(const Vec2&)>& f) {
  std::vector<double> v;
  for (const Vec2& p : m.vertices()) v.push_back(f(p));
  return v;
}

TriMesh jittered_mesh(const Rect& d, int n, std::uint64_t seed) {
  const TriMesh base = structured_rect_mesh(d, n, n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> j(-0.3, 0.3);
  std::vector<Vec2> v(base.vertices().begin(), base.vertices().end());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (base.vertex_class(static_cast<Index>(i)).kind == VertexKind::interior)
      v[i] += Vec2{j(rng) * d.width() / n, j(rng) * d.height() / n};
  return build_mesh(v, {base.triangles().begin(), base.triangles().end()},
                    {base.boundary_edges().begin(), base.boundary_edges().end()});
}

}  // namespace

TEST(HessianRecovery, ExactForGlobalQuadratic) {
  for (const TriMesh& m : {structured_rect_mesh({0, 1, 0, 1}, 5, 5), jittered_mesh({-2, 1, 3, 4}, 7, 1)}) {
    const auto h = recover_hessian(m, sample(m, [](const Vec2& p) { return p.x * p.x + 3 * p.x * p.y; }));
    for (const Sym2& s : h) {  // boundary and corner vertices included
      EXPECT_NEAR(s.xx, 2.0, 1e-8);
      EXPECT_NEAR(s.xy, 3.0, 1e-8);
      EXPECT_NEAR(s.yy, 0.0, 1e-8);
    }
  }
}

TEST(HessianRecovery, ExactForRandomQuadratics) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5, 5);
  const TriMesh m = jittered_mesh({0.1, 1, 0.1, 1}, 9, 2);
  for (int k = 0; k < 20; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng), f = u(rng);
    const auto h = recover_hessian(m, sample(m, [&](const Vec2& p) {
      return a * p.x * p.x + b * p.x * p.y + c * p.y * p.y + d * p.x + e * p.y + f;
    }));
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    for (const Sym2& s : h) {
      EXPECT_NEAR(s.xx, 2 * a, 1e-8 * scale);
      EXPECT_NEAR(s.xy, b, 1e-8 * scale);
      EXPECT_NEAR(s.yy, 2 * c, 1e-8 * scale);
    }
  }
}

TEST(HessianRecovery, ExactOnStretchedRotatedMesh) {
  // aspect ratio 1e4, then rotated; u is an O(1) quadratic in the stretched coordinates
  const double s = 1e-4, th = 0.3;
  const TriMesh base = jittered_mesh({0, 1, 0, s}, 8, 5);
  std::vector<Vec2> v;
  for (const Vec2& p : base.vertices())
    v.push_back({std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y});
  const TriMesh m = build_mesh(v, {base.triangles().begin(), base.triangles().end()},
                               {base.boundary_edges().begin(), base.boundary_edges().end()});
  const Sym2 ref = rotate(Sym2{2.0 * 1.5, -0.7 / s, 2.0 * 0.4 / (s * s)}, -th);
  const auto h = recover_hessian(m, sample(m, [&](const Vec2& p) {
    const double x = std::cos(th) * p.x + std::sin(th) * p.y, y = (-std::sin(th) * p.x + std::cos(th) * p.y) / s;
    return 1.5 * x * x - 0.7 * x * y + 0.4 * y * y + x - 2 * y;
  }));
  for (const Sym2& r : h) EXPECT_LE(max_abs_entry(r - ref), 1e-6 * max_abs_entry(ref));
}

TEST(HessianRecovery, LinearGivesZero) {
  const TriMesh m = jittered_mesh({0, 3, 0, 1}, 6, 3);
  for (const Sym2& s : recover_hessian(m, sample(m, [](const Vec2& p) { return 4 - 2 * p.x + 7 * p.y; })))
    EXPECT_LE(max_abs_entry(s), 1e-9);
}

TEST(HessianRecovery, TranslationLeavesResultUnchanged) {
  const TriMesh m = jittered_mesh({0, 1, 0, 1}, 8, 4);
  const Vec2 shift{12.5, -3.25};
  std::vector<Vec2> moved;
  for (const Vec2& p : m.vertices()) moved.push_back(p + shift);
  const TriMesh t = build_mesh(moved, {m.triangles().begin(), m.triangles().end()},
                               {m.boundary_edges().begin(), m.boundary_edges().end()});
  auto f = [](const Vec2& p) { return std::sin(3 * p.x) * std::exp(p.y); };
  const auto a = recover_hessian(m, sample(m, f));
  const auto b = recover_hessian(t, sample(m, f));  // same nodal values on the moved mesh
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(max_abs_entry(a[i] - b[i]), 1e-10 * std::max(1.0, max_abs_entry(a[i])));
}

TEST(HessianRecovery, CircleFrontWithinThirtyPercent) {
  const ProblemDef prob = circle_problem();
  const TriMesh m = structured_rect_mesh(prob.domain, 64, 64);
  const auto h = recover_hessian(m, sample(m, [&](const Vec2& p) { return eval(prob, p).value; }));
  const Vec2 target{0.8 / std::sqrt(2.0), 0.8 / std::sqrt(2.0)};
  Index best = 0;
  for (Index v = 0; v < static_cast<Index>(m.num_vertices()); ++v)
    if (norm(m.vertex(v) - target) < norm(m.vertex(best) - target)) best = v;
  auto largest = [](const Sym2& s) {
    const SymEigen e = eigen(s);
    return std::max(std::abs(e.l1), std::abs(e.l2));
  };
  const double exact = largest(eval(prob, m.vertex(best)).hessian);
  EXPECT_NEAR(largest(h[static_cast<std::size_t>(best)]), exact, 0.3 * exact);
}

TEST(HessianRecovery, RejectsMismatchedInputAndDegeneratePatches) {
  const TriMesh m = structured_rect_mesh({0, 1, 0, 1}, 2, 2);
  EXPECT_THROW(recover_hessian(m, std::vector<double>(3, 0.0)), std::invalid_argument);
  // a single triangle: three samples can never determine a quadratic
  const TriMesh one = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{{0, 1}, 1}, {{1, 2}, 1}, {{2, 0}, 1}});
  try {
    recover_hessian(one, std::vector<double>{0, 1, 2});
    ADD_FAILURE() << "expected RecoveryError";
  } catch (const RecoveryError& e) {
    EXPECT_EQ(e.vertex(), 0);
  }
  // a strip of collinear-row vertices: all samples on two lines, quadratic in y undetermined
  const TriMesh strip = structured_rect_mesh({0, 5, 0, 0.1}, 5, 1);
  EXPECT_THROW(recover_hessian(strip, std::vector<double>(strip.num_vertices(), 1.0)), RecoveryError);
}
