#pragma once

// Vertex Hessians recovered from nodal values by patch-wise quadratic
// least squares.

#include <span>
#include <stdexcept>
#include <vector>

#include "anisomesh/mesh.hpp"
#include "anisomesh/tensor2.hpp"

namespace anisomesh {

class RecoveryError : public std::runtime_error {
 public:
  RecoveryError(Index vertex, const std::string& what) : std::runtime_error(what), vertex_(vertex) {}
  Index vertex() const noexcept { return vertex_; }

 private:
  Index vertex_;
};

struct RecoveryOptions {
  /// Patches grow ring by ring up to this many rings.
  int max_rings = 3;
  /// Largest accepted condition number of the scaled normal matrix.
  double max_condition = 1e8;
};

/// Fits u ~ c0 + c1 x + c2 y + c3 x^2 + c4 xy + c5 y^2 around every vertex and
/// returns [[2 c3, c4], [c4, 2 c5]]. Exact for global quadratics.
/// Throws RecoveryError when no patch within max_rings is well conditioned.
std::vector<Sym2> recover_hessian(const TriMesh& mesh, std::span<const double> vertex_values,
                                  const RecoveryOptions& options = {});

}  // namespace anisomesh
