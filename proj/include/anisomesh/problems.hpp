#pragma once

// Analytic test fields with closed-form gradient and Hessian.

#include <stdexcept>
#include <string>
#include <vector>

#include "anisomesh/mesh.hpp"
#include "anisomesh/tensor2.hpp"

namespace anisomesh {

enum class ProblemId { circle, zigzag, layers, quadratic };

const char* to_string(ProblemId id);

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemDef {
  ProblemId id = ProblemId::quadratic;
  Rect domain;
  /// Layer half-width parameter of the ten-layer field.
  double eps = 0.01;
  /// u = x^T A x + b^T x + c for the quadratic field.
  Sym2 A = Sym2::identity();
  Vec2 b;
  double c = 0.0;
};

struct FieldSample {
  double value = 0.0;
  Vec2 gradient;
  Sym2 hessian;
};

/// Logistic front across the quarter circle of radius 0.8 on (0.1, 1)^2.
ProblemDef circle_problem();
/// Cubic plus a tanh front along sin(5y) = 2x on (-1, 1)^2.
ProblemDef zigzag_problem();
/// Ten logistic layers along x +- y = {0, +-0.6, +-1.2} on (-1.2, 1.2)^2.
ProblemDef layers_problem(double eps = 0.01);
ProblemDef quadratic_problem(const Sym2& A, const Vec2& b = {}, double c = 0.0,
                             const Rect& domain = {0.0, 1.0, 0.0, 1.0});

/// Looks up "circle", "zigzag", "layers" or "quadratic" (u = x^2 + y^2 on the unit square).
ProblemDef problem_from_name(const std::string& name);

/// Throws DomainError if the point lies outside the closed domain.
FieldSample eval(const ProblemDef& problem, const Vec2& point);
/// Skips the domain check.
FieldSample eval_unchecked(const ProblemDef& problem, const Vec2& point);
double value_unchecked(const ProblemDef& problem, const Vec2& point);

std::vector<Sym2> hessian_analytic_field(const ProblemDef& problem, const TriMesh& mesh);
std::vector<double> sample_values(const ProblemDef& problem, const TriMesh& mesh);

/// Unsigned distance from a point to the problem's characteristic curve
/// (circle, zigzag curve, or nearest of the ten layer lines).
double feature_distance(const ProblemDef& problem, const Vec2& point);

}  // namespace anisomesh
