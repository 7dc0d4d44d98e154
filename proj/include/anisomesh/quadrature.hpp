#pragma once

#include <array>
#include <vector>

namespace anisomesh {

/// Quadrature on the reference triangle in barycentric coordinates.
/// Weights are normalized to sum to one, so a rule integrates the mean
/// value; multiply by the element area.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Rule exact for all polynomials of total degree <= `degree` (any degree >= 0).
/// Built as a collapsed Gauss-Legendre product rule; results are cached.
const QuadratureRule& triangle_rule(int degree);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace anisomesh
