#pragma once

// Element-wise interpolation error formulas for quadratic u with Hessian H,
// and the norm-equivalence constants used to move between L^p norms.

#include <array>
#include <span>

#include "anisomesh/mesh.hpp"
#include "anisomesh/tensor2.hpp"

namespace anisomesh {

/// Edge quadratic forms of one element.
///   half_edge_forms[i] = 1/2 l_i . H l_i
///   cross_forms[i]     = l_{i+1} . H l_{i+2}
struct EdgeQuadraticForms {
  std::array<double, 3> half_edge_forms{};
  std::array<double, 3> cross_forms{};
};

EdgeQuadraticForms edge_quadratic_forms(const ElementGeometry& geom, const Sym2& H);

/// Selects between the oracle-validated formulas and the forms as printed in
/// the literature (kept for comparison runs only).
enum class FormulaVariant { validated, literal };

/// ||u - u_I||^2_{L^2(K)} = |K|/180 [(d1+d2+d3)^2 + d1^2+d2^2+d3^2], d_i = 1/2 l_i.H l_i.
/// The literal variant evaluates |K|/180 [(sum d)^2 + d1d2+d2d3+d1d3] with d_i = l_i.H l_i.
double l2_error_sq(const ElementGeometry& geom, const Sym2& H,
                   FormulaVariant variant = FormulaVariant::validated);

/// ||grad(u - u_I)||^2_{L^2(K)} = 1/(48|K|) sum_i (l_{i+1}.H l_{i+2})^2 |l_i|^2.
double h1_error_sq(const ElementGeometry& geom, const Sym2& H);

/// Estimate of ||u - u_I||^2_{L^p(K)}: |K|^{2/p - 1} l2_error_sq, with 2/p = 0 at p = inf.
double lp_error_estimate(const ElementGeometry& geom, const Sym2& H, double p);

/// Estimate of ||grad(u - u_I)||^2_{L^p(K)}: |K|^{2/p - 2}/48 sum_i (l_{i+1}.H l_{i+2})^2 |l_i|^2.
double w1p_error_estimate(const ElementGeometry& geom, const Sym2& H, double p);

struct LinfEstimate {
  double value = 0.0;
  /// True when the triangle stretched by (sqrt(l1), sqrt(l2)) contains its
  /// circumcenter, i.e. when the maximum is attained in the interior.
  bool applicable = false;
};

/// Max-norm error for u = l1 x^2 + l2 y^2:  D11 D22 D33 / (16 l1 l2 |K|^2),
/// D_ii = l_i . diag(l1, l2) l_i (the squared circumradius of the stretched triangle).
/// The literal variant returns D12 D23 D31 / (16 l1 l2 |K|^2) and is never applicable.
/// Throws std::invalid_argument for non-positive eigenvalues.
LinfEstimate linf_error_ds(const ElementGeometry& geom, double lambda1, double lambda2,
                           FormulaVariant variant = FormulaVariant::validated);

struct EquivConstants {
  double p = 2.0;
  /// C_p of the L^1 / L^p equivalence on P2 (d = 2).
  double c_p = 1.0;
  /// C_{1/p}.
  double c_inv_p = 1.0;
  /// Lower and upper constants comparing l^p and l^2 vector norms in d = 2.
  double lower = 1.0;
  double upper = 1.0;
  int dimension = 2;
};

/// Norm-equivalence constants for d = 2.
EquivConstants norm_equiv_constants(double p);

/// C_p for arbitrary p in (0, inf] and dimension d.
double polynomial_equiv_constant(double p, int dimension = 2);

/// Lower/upper constants of  lower |a|_2 <= |a|_p <= upper |a|_2  for a in R^d_+.
std::array<double, 2> vector_equiv_constants(double p, int dimension);

/// Arithmetic mean of the three vertex Hessians.
Sym2 element_hessian(const TriMesh& mesh, Index triangle_id, std::span<const Sym2> vertex_hessians);

}  // namespace anisomesh
