#pragma once

// Quadrature oracle for the linear interpolation error e = u - u_I and its
// gradient, measured in L^p for p in (0, inf].

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "anisomesh/mesh.hpp"
#include "anisomesh/problems.hpp"

namespace anisomesh {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct OracleOptions {
  int degree = 8;
  /// Element refinement stops once the 4-way split changes a contribution by
  /// less than this fraction of the element total.
  double rel_tol = 1e-4;
  int max_depth = 6;
  /// Lattice divisions per element edge used to sample the maximum for p = inf.
  int sample_divisions = 8;
};

struct ErrorBreakdown {
  double p = 2.0;
  /// (sum of per_element)^(1/p) for finite p; the largest entry for p = inf.
  double global = 0.0;
  /// Integral of |e|^p over each element, or the element maximum for p = inf.
  std::vector<double> per_element;
};

/// ||u - u_I||_{L^p}. Throws std::invalid_argument for p <= 0 or NaN.
ErrorBreakdown interp_error_lp(const TriMesh& mesh, const ProblemDef& problem, double p,
                               const OracleOptions& options = {});

/// ||grad(u - u_I)||_{L^p} with the Euclidean norm of the gradient.
ErrorBreakdown interp_grad_error_lp(const TriMesh& mesh, const ProblemDef& problem, double p,
                                    const OracleOptions& options = {});

/// Exact max |e| over K when u is the quadratic with constant Hessian H.
/// Checks the interior stationary point and the three edge midpoints.
double element_linf_error_quadratic(const ElementGeometry& geom, const Sym2& H);

using ScalarField = std::function<double(const Vec2&)>;

/// Integral of |f|^p over a triangle by adaptive subdivision.
double integrate_abs_pow(const std::array<Vec2, 3>& tri, const ScalarField& f, double p,
                         const OracleOptions& options = {});

/// Max of |f| over a triangle by lattice sampling and local zoom.
double max_abs_sampled(const std::array<Vec2, 3>& tri, const ScalarField& f,
                       const OracleOptions& options = {});

/// L^p (quasi-)norm of f on one triangle, p in (0, inf].
double lp_norm_on_triangle(const std::array<Vec2, 3>& tri, const ScalarField& f, double p,
                           const OracleOptions& options = {});

void require_valid_p(double p);

}  // namespace anisomesh
