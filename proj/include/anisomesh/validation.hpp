#pragma once

// Randomized arbitration suites: closed-form element error formulas against
// the quadrature oracle, and the norm-equivalence sandwich bounds.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "anisomesh/mesh.hpp"
#include "anisomesh/tensor2.hpp"

namespace anisomesh {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  /// Largest relative discrepancy (arbitration) or largest bound overshoot
  /// ratio minus one (bounds; negative means every case held with margin).
  double worst = 0.0;
  bool passed() const { return cases > 0 && failures == 0; }
};

/// Random triangle with aspect ratio up to max_aspect; counter-clockwise.
std::array<Vec2, 3> random_triangle(std::mt19937_64& rng, double max_aspect);

/// l2_error_sq and h1_error_sq against oracle integration of the quadratic
/// with random Hessian entries in [-5, 5]. A case fails above tol relative.
SuiteResult formula_arbitration(std::size_t cases, std::uint64_t seed, double tol = 1e-9);

/// linf_error_ds on triangles acute in the metric (must be applicable and
/// match element_linf_error_quadratic) plus right-in-metric triangles (must
/// be flagged not applicable).
SuiteResult linf_arbitration(std::size_t cases, std::uint64_t seed, double tol = 1e-9);

/// For each p: the polynomial-norm equivalence on random non-negative
/// quadratics, and the L^p estimate sandwich for errors of convex quadratics.
SuiteResult lemma_bounds(std::size_t cases, std::uint64_t seed, const std::vector<double>& ps);

/// The p values used by default: 1/2, 1, 3/2, 2, 4, 10, inf.
std::vector<double> default_lemma_ps();

}  // namespace anisomesh
