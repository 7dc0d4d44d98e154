#include "anisomesh/mesh.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace anisomesh {

namespace {

struct EdgeUse {
  Index lo;
  Index hi;
  Index tri;
  bool forward;  // appears as lo -> hi in the triangle's orientation
};

std::string triangle_label(std::size_t t) {
  std::ostringstream os;
  os << "triangle " << t;
  return os.str();
}

}  // namespace

const char* to_string(MeshErrorKind kind) {
  switch (kind) {
    case MeshErrorKind::invalid_argument: return "invalid argument";
    case MeshErrorKind::index_out_of_range: return "index out of range";
    case MeshErrorKind::duplicate_vertex_in_triangle: return "duplicate vertex in triangle";
    case MeshErrorKind::degenerate_triangle: return "degenerate triangle";
    case MeshErrorKind::non_manifold_edge: return "non-manifold edge";
    case MeshErrorKind::non_manifold_vertex: return "non-manifold vertex";
    case MeshErrorKind::untagged_boundary_edge: return "untagged boundary edge";
    case MeshErrorKind::unknown_boundary_edge: return "unknown boundary edge";
  }
  return "mesh error";
}

ElementGeometry make_geometry(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  ElementGeometry g;
  g.edge[0] = p2 - p1;
  g.edge[1] = p0 - p2;
  g.edge[2] = p1 - p0;
  g.area = 0.5 * cross(g.edge[1], g.edge[2]);
  return g;
}

double TriMesh::area(Index t) const {
  const Triangle& tri = triangle(t);
  return make_geometry(vertex(tri[0]), vertex(tri[1]), vertex(tri[2])).area;
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) a += area(static_cast<Index>(t));
  return a;
}

Vec2 TriMesh::centroid(Index t) const {
  const Triangle& tri = triangle(t);
  return (1.0 / 3.0) * (vertex(tri[0]) + vertex(tri[1]) + vertex(tri[2]));
}

Rect TriMesh::bounding_box() const {
  Rect r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& p : vertices_) {
    r.x0 = std::min(r.x0, p.x);
    r.x1 = std::max(r.x1, p.x);
    r.y0 = std::min(r.y0, p.y);
    r.y1 = std::max(r.y1, p.y);
  }
  return r;
}

std::vector<std::array<Index, 2>> TriMesh::edges() const {
  std::vector<std::array<Index, 2>> out;
  out.reserve(triangles_.size() * 3);
  for (const Triangle& t : triangles_) {
    for (int i = 0; i < 3; ++i) {
      const Index a = t[i];
      const Index b = t[(i + 1) % 3];
      out.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t TriMesh::num_interior_edges() const {
  return edges().size() - boundary_edges_.size();
}

TriMesh build_mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                   std::vector<BoundaryEdge> boundary_edges) {
  const auto nv = static_cast<Index>(vertices.size());
  if (triangles.empty()) throw MeshError(MeshErrorKind::invalid_argument, "mesh has no triangles");
  for (const Vec2& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw MeshError(MeshErrorKind::invalid_argument, "non-finite vertex coordinate");
  }

  for (std::size_t t = 0; t < triangles.size(); ++t) {
    Triangle& tri = triangles[t];
    for (Index v : tri) {
      if (v < 0 || v >= nv)
        throw MeshError(MeshErrorKind::index_out_of_range,
                        triangle_label(t) + " references vertex " + std::to_string(v));
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError(MeshErrorKind::duplicate_vertex_in_triangle, triangle_label(t));
    const Vec2& p0 = vertices[tri[0]];
    const Vec2& p1 = vertices[tri[1]];
    const Vec2& p2 = vertices[tri[2]];
    double a2 = cross(p1 - p0, p2 - p0);
    if (a2 < 0.0) {
      std::swap(tri[1], tri[2]);
      a2 = -a2;
    }
    const double scale = std::max({norm_squared(p1 - p0), norm_squared(p2 - p1),
                                   norm_squared(p0 - p2)});
    if (!(a2 > 1e-14 * scale))
      throw MeshError(MeshErrorKind::degenerate_triangle, triangle_label(t) + " has zero area");
  }

  std::vector<EdgeUse> uses;
  uses.reserve(triangles.size() * 3);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    for (int i = 0; i < 3; ++i) {
      const Index a = tri[i];
      const Index b = tri[(i + 1) % 3];
      uses.push_back({std::min(a, b), std::max(a, b), static_cast<Index>(t), a < b});
    }
  }
  std::sort(uses.begin(), uses.end(), [](const EdgeUse& l, const EdgeUse& r) {
    return std::tie(l.lo, l.hi, l.tri) < std::tie(r.lo, r.hi, r.tri);
  });

  // Boundary edges of the triangulation, keyed by (lo, hi) -> directed edge.
  std::map<std::pair<Index, Index>, std::array<Index, 2>> open_edges;
  std::vector<int> edge_count(vertices.size(), 0);
  for (std::size_t i = 0; i < uses.size();) {
    std::size_t j = i;
    while (j < uses.size() && uses[j].lo == uses[i].lo && uses[j].hi == uses[i].hi) ++j;
    const std::size_t n = j - i;
    const std::string label =
        "edge (" + std::to_string(uses[i].lo) + ", " + std::to_string(uses[i].hi) + ")";
    if (n > 2)
      throw MeshError(MeshErrorKind::non_manifold_edge, label + " shared by more than 2 triangles");
    if (n == 2 && uses[i].forward == uses[i + 1].forward)
      throw MeshError(MeshErrorKind::non_manifold_edge, label + " has inconsistent orientation");
    if (n == 1) {
      const EdgeUse& u = uses[i];
      open_edges[{u.lo, u.hi}] = u.forward ? std::array<Index, 2>{u.lo, u.hi}
                                           : std::array<Index, 2>{u.hi, u.lo};
    }
    ++edge_count[uses[i].lo];
    ++edge_count[uses[i].hi];
    i = j;
  }

  std::map<std::pair<Index, Index>, bool> seen;
  for (BoundaryEdge& be : boundary_edges) {
    const Index a = be.v[0];
    const Index b = be.v[1];
    if (a < 0 || a >= nv || b < 0 || b >= nv)
      throw MeshError(MeshErrorKind::index_out_of_range, "boundary edge references vertex out of range");
    const std::pair<Index, Index> key{std::min(a, b), std::max(a, b)};
    auto it = open_edges.find(key);
    if (it == open_edges.end())
      throw MeshError(MeshErrorKind::unknown_boundary_edge,
                      "boundary edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") is not a boundary edge of the triangulation");
    if (!seen.emplace(key, true).second)
      throw MeshError(MeshErrorKind::invalid_argument,
                      "boundary edge (" + std::to_string(a) + ", " + std::to_string(b) + ") listed twice");
    be.v = it->second;
  }
  if (seen.size() != open_edges.size()) {
    for (const auto& [key, directed] : open_edges) {
      if (!seen.count(key))
        throw MeshError(MeshErrorKind::untagged_boundary_edge,
                        "edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                            ") lies on the boundary but carries no tag");
    }
  }

  std::vector<int> tri_count(vertices.size(), 0);
  for (const Triangle& t : triangles)
    for (Index v : t) ++tri_count[v];

  // incoming / outgoing boundary edge per vertex
  std::vector<int> in_tag(vertices.size(), 0), out_tag(vertices.size(), 0);
  std::vector<int> boundary_count(vertices.size(), 0);
  for (const BoundaryEdge& be : boundary_edges) {
    out_tag[be.v[0]] = be.tag;
    in_tag[be.v[1]] = be.tag;
    ++boundary_count[be.v[0]];
    ++boundary_count[be.v[1]];
  }

  std::vector<VertexClass> classes(vertices.size());
  for (Index v = 0; v < nv; ++v) {
    if (tri_count[v] == 0)
      throw MeshError(MeshErrorKind::invalid_argument, "vertex " + std::to_string(v) + " is unreferenced");
    const int b = boundary_count[v];
    if ((b != 0 && b != 2) || edge_count[v] - tri_count[v] != b / 2)
      throw MeshError(MeshErrorKind::non_manifold_vertex,
                      "vertex " + std::to_string(v) + " joins disconnected triangle fans");
    if (b == 0) {
      classes[v] = {VertexKind::interior, 0};
    } else if (in_tag[v] == out_tag[v]) {
      classes[v] = {VertexKind::boundary, in_tag[v]};
    } else {
      classes[v] = {VertexKind::corner, in_tag[v]};
    }
  }

  TriMesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.triangles_ = std::move(triangles);
  mesh.boundary_edges_ = std::move(boundary_edges);
  mesh.classes_ = std::move(classes);
  return mesh;
}

ElementGeometry element_geometry(const TriMesh& mesh, Index triangle_id) {
  if (triangle_id < 0 || static_cast<std::size_t>(triangle_id) >= mesh.num_triangles())
    throw MeshError(MeshErrorKind::index_out_of_range,
                    "triangle id " + std::to_string(triangle_id) + " out of range");
  const Triangle& t = mesh.triangle(triangle_id);
  return make_geometry(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
}

TriMesh structured_rect_mesh(const Rect& domain, int nx, int ny) {
  if (nx < 1 || ny < 1) throw MeshError(MeshErrorKind::invalid_argument, "nx and ny must be >= 1");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw MeshError(MeshErrorKind::invalid_argument, "degenerate rectangle");

  std::vector<Vec2> v;
  v.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    const double y = j == ny ? domain.y1 : domain.y0 + domain.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? domain.x1 : domain.x0 + domain.width() * i / nx;
      v.push_back({x, y});
    }
  }
  auto id = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };

  std::vector<Triangle> t;
  t.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }

  std::vector<BoundaryEdge> b;
  for (int i = 0; i < nx; ++i) b.push_back({{id(i, 0), id(i + 1, 0)}, 1});
  for (int j = 0; j < ny; ++j) b.push_back({{id(nx, j), id(nx, j + 1)}, 2});
  for (int i = nx; i > 0; --i) b.push_back({{id(i, ny), id(i - 1, ny)}, 3});
  for (int j = ny; j > 0; --j) b.push_back({{id(0, j), id(0, j - 1)}, 4});
  return build_mesh(std::move(v), std::move(t), std::move(b));
}

TriMesh refine_uniform(const TriMesh& mesh) {
  std::vector<Vec2> v(mesh.vertices().begin(), mesh.vertices().end());
  std::map<std::pair<Index, Index>, Index> mid;
  auto midpoint = [&](Index a, Index b) {
    const std::pair<Index, Index> key{std::min(a, b), std::max(a, b)};
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const auto id = static_cast<Index>(v.size());
    v.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    mid.emplace(key, id);
    return id;
  };
  std::vector<Triangle> t;
  t.reserve(mesh.num_triangles() * 4);
  for (const Triangle& tri : mesh.triangles()) {
    const Index m01 = midpoint(tri[0], tri[1]);
    const Index m12 = midpoint(tri[1], tri[2]);
    const Index m20 = midpoint(tri[2], tri[0]);
    t.push_back({tri[0], m01, m20});
    t.push_back({m01, tri[1], m12});
    t.push_back({m20, m12, tri[2]});
    t.push_back({m01, m12, m20});
  }
  std::vector<BoundaryEdge> b;
  for (const BoundaryEdge& be : mesh.boundary_edges()) {
    const Index m = midpoint(be.v[0], be.v[1]);
    b.push_back({{be.v[0], m}, be.tag});
    b.push_back({{m, be.v[1]}, be.tag});
  }
  return build_mesh(std::move(v), std::move(t), std::move(b));
}

}  // namespace anisomesh
