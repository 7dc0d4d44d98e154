#pragma once

// Conforming 2D triangulation with tagged boundary segments.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisomesh/tensor2.hpp"

namespace anisomesh {

using Index = std::int32_t;
using Triangle = std::array<Index, 3>;

struct BoundaryEdge {
  std::array<Index, 2> v{};
  int tag = 0;
  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

enum class VertexKind : std::uint8_t { interior, boundary, corner };

struct VertexClass {
  VertexKind kind = VertexKind::interior;
  /// Segment tag for boundary vertices; first tag seen for corners; 0 for interior.
  int tag = 0;
  friend bool operator==(const VertexClass&, const VertexClass&) = default;
};

enum class MeshErrorKind {
  invalid_argument,
  index_out_of_range,
  duplicate_vertex_in_triangle,
  degenerate_triangle,
  non_manifold_edge,
  non_manifold_vertex,
  untagged_boundary_edge,
  unknown_boundary_edge,
};

const char* to_string(MeshErrorKind kind);

class MeshError : public std::runtime_error {
 public:
  MeshError(MeshErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  MeshErrorKind kind() const noexcept { return kind_; }

 private:
  MeshErrorKind kind_;
};

/// Edge vectors and area of one triangle. edge[i] is the side opposite vertex i,
/// oriented cyclically so that edge[0] + edge[1] + edge[2] == 0.
struct ElementGeometry {
  std::array<Vec2, 3> edge{};
  double area = 0.0;
};

/// Builds the geometry of the triangle (p0, p1, p2); area is signed.
ElementGeometry make_geometry(const Vec2& p0, const Vec2& p1, const Vec2& p2);

struct Rect {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
};

/// Immutable validated triangulation. Obtain one through build_mesh() or
/// structured_rect_mesh().
class TriMesh {
 public:
  TriMesh() = default;

  std::span<const Vec2> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const BoundaryEdge> boundary_edges() const { return boundary_edges_; }
  std::span<const VertexClass> vertex_classes() const { return classes_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  const Vec2& vertex(Index v) const { return vertices_[static_cast<std::size_t>(v)]; }
  const Triangle& triangle(Index t) const { return triangles_[static_cast<std::size_t>(t)]; }
  const VertexClass& vertex_class(Index v) const { return classes_[static_cast<std::size_t>(v)]; }

  double area(Index t) const;
  double total_area() const;
  Vec2 centroid(Index t) const;
  /// Axis-aligned bounding box of all vertices.
  Rect bounding_box() const;
  /// Unique undirected edges (sorted endpoint pairs, lexicographic order).
  std::vector<std::array<Index, 2>> edges() const;
  /// Number of edges shared by two triangles.
  std::size_t num_interior_edges() const;

  friend bool operator==(const TriMesh&, const TriMesh&) = default;

 private:
  friend TriMesh build_mesh(std::vector<Vec2>, std::vector<Triangle>, std::vector<BoundaryEdge>);

  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<VertexClass> classes_;
};

/// Validates raw arrays and returns a mesh. Clockwise triangles are
/// reoriented; boundary edges are oriented with the domain on their left.
/// Throws MeshError.
TriMesh build_mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                   std::vector<BoundaryEdge> boundary_edges);

ElementGeometry element_geometry(const TriMesh& mesh, Index triangle_id);

/// nx by ny cells, each cut into two triangles along the (i,j)-(i+1,j+1)
/// diagonal. Boundary tags: 1 bottom, 2 right, 3 top, 4 left.
TriMesh structured_rect_mesh(const Rect& domain, int nx, int ny);

/// Uniform 1-to-4 refinement by edge midpoints.
TriMesh refine_uniform(const TriMesh& mesh);

}  // namespace anisomesh
