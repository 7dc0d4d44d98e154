#include "anisomesh/error_models.hpp"

#include <cmath>
#include <stdexcept>

#include "anisomesh/exact_norms.hpp"

namespace anisomesh {

namespace {

void require_geometry(const ElementGeometry& geom) {
  if (!(geom.area > 0.0) || !std::isfinite(geom.area))
    throw std::invalid_argument("degenerate element geometry");
}

/// |K|^(2/p + offset) with 2/p = 0 at p = inf.
double area_power(double area, double p, double offset) {
  const double two_over_p = std::isinf(p) ? 0.0 : 2.0 / p;
  return std::pow(area, two_over_p + offset);
}

double h1_bracket(const ElementGeometry& geom, const Sym2& H) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double c = bilinear(geom.edge[(i + 1) % 3], H, geom.edge[(i + 2) % 3]);
    s += c * c * norm_squared(geom.edge[i]);
  }
  return s;
}

}  // namespace

EdgeQuadraticForms edge_quadratic_forms(const ElementGeometry& geom, const Sym2& H) {
  EdgeQuadraticForms f;
  for (int i = 0; i < 3; ++i) {
    f.half_edge_forms[i] = 0.5 * quad_form(H, geom.edge[i]);
    f.cross_forms[i] = bilinear(geom.edge[(i + 1) % 3], H, geom.edge[(i + 2) % 3]);
  }
  return f;
}

double l2_error_sq(const ElementGeometry& geom, const Sym2& H, FormulaVariant variant) {
  require_geometry(geom);
  const EdgeQuadraticForms f = edge_quadratic_forms(geom, H);
  const auto& d = f.half_edge_forms;
  const double sum = d[0] + d[1] + d[2];
  if (variant == FormulaVariant::literal) {
    const std::array<double, 3> D{2.0 * d[0], 2.0 * d[1], 2.0 * d[2]};
    const double s = D[0] + D[1] + D[2];
    return geom.area / 180.0 * (s * s + D[0] * D[1] + D[1] * D[2] + D[0] * D[2]);
  }
  return geom.area / 180.0 * (sum * sum + d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

double h1_error_sq(const ElementGeometry& geom, const Sym2& H) {
  require_geometry(geom);
  return h1_bracket(geom, H) / (48.0 * geom.area);
}

double lp_error_estimate(const ElementGeometry& geom, const Sym2& H, double p) {
  require_valid_p(p);
  return area_power(geom.area, p, -1.0) * l2_error_sq(geom, H);
}

double w1p_error_estimate(const ElementGeometry& geom, const Sym2& H, double p) {
  require_valid_p(p);
  require_geometry(geom);
  return area_power(geom.area, p, -2.0) / 48.0 * h1_bracket(geom, H);
}

LinfEstimate linf_error_ds(const ElementGeometry& geom, double lambda1, double lambda2,
                           FormulaVariant variant) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("linf_error_ds requires positive eigenvalues");
  require_geometry(geom);
  const Sym2 D = Sym2::diag(lambda1, lambda2);
  std::array<double, 3> diag{}, off{};
  for (int i = 0; i < 3; ++i) {
    diag[i] = quad_form(D, geom.edge[i]);
    off[i] = bilinear(geom.edge[(i + 1) % 3], D, geom.edge[(i + 2) % 3]);
  }
  const double denom = 16.0 * lambda1 * lambda2 * geom.area * geom.area;
  LinfEstimate out;
  if (variant == FormulaVariant::literal) {
    out.value = off[0] * off[1] * off[2] / denom;
    return out;
  }
  out.value = diag[0] * diag[1] * diag[2] / denom;
  // The stretched angle at vertex i is acute iff l_{i+1}.D l_{i+2} < 0.
  out.applicable = true;
  for (int i = 0; i < 3; ++i) {
    const double scale = diag[(i + 1) % 3] + diag[(i + 2) % 3];
    if (!(off[i] < -1e-10 * scale)) out.applicable = false;
  }
  return out;
}

double polynomial_equiv_constant(double p, int dimension) {
  require_valid_p(p);
  const double d = dimension;
  const double lead = (d + 1.0) * (d + 2.0);
  if (p <= 1.0) return 1.0;
  if (std::isinf(p)) return lead;
  double fact = 1.0;
  double prod = 1.0;
  for (int j = 1; j <= dimension; ++j) {
    fact *= j;
    prod *= p + j;
  }
  return lead * std::pow(fact / prod, 1.0 / p);
}

std::array<double, 2> vector_equiv_constants(double p, int dimension) {
  require_valid_p(p);
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double c = std::pow(static_cast<double>(dimension), inv_p - 0.5);
  if (p < 2.0) return {1.0, c};
  if (p > 2.0) return {c, 1.0};
  return {1.0, 1.0};
}

EquivConstants norm_equiv_constants(double p) {
  require_valid_p(p);
  EquivConstants k;
  k.p = p;
  k.c_p = polynomial_equiv_constant(p);
  k.c_inv_p = std::isinf(p) ? 1.0 : polynomial_equiv_constant(1.0 / p);
  const auto v = vector_equiv_constants(p, 2);
  k.lower = v[0];
  k.upper = v[1];
  return k;
}

Sym2 element_hessian(const TriMesh& mesh, Index triangle_id, std::span<const Sym2> vertex_hessians) {
  const Triangle& t = mesh.triangle(triangle_id);
  Sym2 h;
  for (Index v : t) h += vertex_hessians[static_cast<std::size_t>(v)];
  return (1.0 / 3.0) * h;
}

}  // namespace anisomesh
