#include "anisomesh/hessian_recovery.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace anisomesh {

namespace {

/// Compressed vertex-to-vertex adjacency.
struct Adjacency {
  std::vector<std::size_t> offset;
  std::vector<Index> nbr;

  std::span<const Index> of(Index v) const {
    const auto i = static_cast<std::size_t>(v);
    return {nbr.data() + offset[i], offset[i + 1] - offset[i]};
  }
};

Adjacency vertex_adjacency(const TriMesh& mesh) {
  std::vector<std::array<Index, 2>> pairs;
  for (const auto& e : mesh.edges()) {
    pairs.push_back(e);
    pairs.push_back({e[1], e[0]});
  }
  std::sort(pairs.begin(), pairs.end());
  Adjacency adj;
  adj.offset.assign(mesh.num_vertices() + 1, 0);
  for (const auto& p : pairs) ++adj.offset[static_cast<std::size_t>(p[0]) + 1];
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) adj.offset[i + 1] += adj.offset[i];
  adj.nbr.reserve(pairs.size());
  for (const auto& p : pairs) adj.nbr.push_back(p[1]);
  return adj;
}

}  // namespace

std::vector<Sym2> recover_hessian(const TriMesh& mesh, std::span<const double> vertex_values,
                                  const RecoveryOptions& options) {
  if (vertex_values.size() != mesh.num_vertices())
    throw std::invalid_argument("recover_hessian: one value per vertex required");
  const Adjacency adj = vertex_adjacency(mesh);
  std::vector<Sym2> out(mesh.num_vertices());
  std::vector<int> mark(mesh.num_vertices(), -1);

  for (Index v = 0; v < static_cast<Index>(mesh.num_vertices()); ++v) {
    std::vector<Index> patch{v};
    mark[static_cast<std::size_t>(v)] = v;
    std::size_t frontier_begin = 0;
    bool done = false;
    for (int ring = 1; ring <= options.max_rings && !done; ++ring) {
      const std::size_t frontier_end = patch.size();
      for (std::size_t k = frontier_begin; k < frontier_end; ++k) {
        for (Index w : adj.of(patch[k])) {
          if (mark[static_cast<std::size_t>(w)] != v) {
            mark[static_cast<std::size_t>(w)] = v;
            patch.push_back(w);
          }
        }
      }
      frontier_begin = frontier_end;
      if (patch.size() < 6) continue;

      // Fit in a frame that whitens the patch offsets; quadratics are affine
      // invariant, so only the conditioning changes on stretched patches.
      const Vec2 c = mesh.vertex(v);
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (Index w : patch) {
        const Vec2 d = mesh.vertex(w) - c;
        cov += Eigen::Vector2d(d.x, d.y) * Eigen::Vector2d(d.x, d.y).transpose();
      }
      cov /= static_cast<double>(patch.size());
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ce(cov);
      if (!(ce.eigenvalues()(0) > 1e-24 * ce.eigenvalues()(1))) continue;
      const Eigen::Matrix2d T = ce.eigenvectors() * ce.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                ce.eigenvectors().transpose();
      Eigen::MatrixXd A(static_cast<Eigen::Index>(patch.size()), 6);
      Eigen::VectorXd b(static_cast<Eigen::Index>(patch.size()));
      for (std::size_t k = 0; k < patch.size(); ++k) {
        const Vec2 o = mesh.vertex(patch[k]) - c;
        const Eigen::Vector2d d = T * Eigen::Vector2d(o.x, o.y);
        const auto r = static_cast<Eigen::Index>(k);
        A(r, 0) = 1.0;
        A(r, 1) = d.x();
        A(r, 2) = d.y();
        A(r, 3) = d.x() * d.x();
        A(r, 4) = d.x() * d.y();
        A(r, 5) = d.y() * d.y();
        b(r) = vertex_values[static_cast<std::size_t>(patch[k])];
      }
      const Eigen::Matrix<double, 6, 6> normal = A.transpose() * A;
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(normal, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      if (!(lo > 0.0) || hi / lo > options.max_condition) continue;

      const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
      Eigen::Matrix2d h;
      h << 2.0 * coef(3), coef(4), coef(4), 2.0 * coef(5);
      const Eigen::Matrix2d hx = T.transpose() * h * T;
      out[static_cast<std::size_t>(v)] = {hx(0, 0), 0.5 * (hx(0, 1) + hx(1, 0)), hx(1, 1)};
      done = true;
    }
    if (!done)
      throw RecoveryError(v, "Hessian recovery failed at vertex " + std::to_string(v) +
                                 ": patch is rank deficient");
  }
  return out;
}

}  // namespace anisomesh
