#include "anisomesh/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace anisomesh {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : (n == 1 ? x : p1);
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

QuadratureRule make_collapsed_rule(int degree) {
  // x = u, y = v (1 - u); a degree-k monomial becomes degree k+1 in u, k in v.
  const int n = std::max(1, (degree + 3) / 2);
  std::vector<double> t, w;
  gauss_legendre_01(n, t, w);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = t[static_cast<std::size_t>(i)];
      const double v = t[static_cast<std::size_t>(j)];
      const double x = u;
      const double y = v * (1.0 - u);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(2.0 * w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree) {
  if (degree < 0 || degree > 60) throw std::invalid_argument("quadrature degree out of range");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_collapsed_rule(degree)).first;
  return it->second;
}

}  // namespace anisomesh
