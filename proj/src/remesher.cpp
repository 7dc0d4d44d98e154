#include "anisomesh/remesher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace anisomesh {

namespace {

constexpr double kFourRootThree = 6.928203230275509;

std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double quality_in(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Sym2& m) {
  const double area = 0.5 * cross(p1 - p0, p2 - p0) * std::sqrt(std::max(0.0, det(m)));
  const double s = quad_form(m, p2 - p1) + quad_form(m, p0 - p2) + quad_form(m, p1 - p0);
  if (!(s > 0.0)) return 0.0;
  return kFourRootThree * area / s;
}

Sym2 log_mean(const Sym2& a, const Sym2& b, const Sym2& c) { return exp_sym((1.0 / 3.0) * (a + b + c)); }

/// Parameter along a->b of the point splitting the metric length in half when
/// the metric length density varies geometrically from la to lb.
double metric_midpoint(double la, double lb) {
  if (!(la > 0.0) || !(lb > 0.0)) return 0.5;
  const double r = lb / la;
  if (std::abs(r - 1.0) < 1e-9) return 0.5;
  const double s = std::log(0.5 * (r + 1.0)) / std::log(r);
  return std::clamp(s, 0.05, 0.95);
}

double min_positive_area_tol(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const double e = std::max({norm_squared(p1 - p0), norm_squared(p2 - p1), norm_squared(p0 - p2)});
  return 1e-12 * e;
}

class Workspace {
 public:
  Workspace(const TriMesh& mesh, const MetricField& field, const BackgroundMetric& bg,
            const RemeshOptions& opt)
      : bg_(bg), opt_(opt) {
    const auto verts = mesh.vertices();
    x_.assign(verts.begin(), verts.end());
    const auto cls = mesh.vertex_classes();
    cls_.assign(cls.begin(), cls.end());
    met_.assign(field.tensors.begin(), field.tensors.end());
    for (const Sym2& m : met_) log_.push_back(log_spd(m));
    vdead_.assign(x_.size(), 0);
    vt_.resize(x_.size());
    for (const Triangle& t : mesh.triangles()) add_triangle(t[0], t[1], t[2]);
    for (const BoundaryEdge& e : mesh.boundary_edges()) btag_[edge_key(e.v[0], e.v[1])] = e.tag;
  }

  OperationCounts counts;

  std::size_t split_pass();
  std::size_t collapse_pass();
  std::size_t repair_pass();
  std::size_t flip_pass();
  std::size_t smooth_pass();
  double out_of_range_fraction() const;
  TriMesh to_mesh(std::vector<Sym2>* metrics) const;

 private:
  struct Edge {
    double length;
    Index a;
    Index b;
  };

  const BackgroundMetric& bg_;
  const RemeshOptions& opt_;
  std::vector<Vec2> x_;
  std::vector<VertexClass> cls_;
  std::vector<Sym2> met_;
  std::vector<Sym2> log_;
  std::vector<char> vdead_;
  std::vector<Triangle> tri_;
  std::vector<char> tdead_;
  std::vector<std::vector<Index>> vt_;
  std::map<std::uint64_t, int> btag_;

  Index add_vertex(const Vec2& p, VertexClass c) {
    x_.push_back(p);
    cls_.push_back(c);
    const Sym2 l = bg_.log_at(p);
    log_.push_back(l);
    met_.push_back(exp_sym(l));
    vdead_.push_back(0);
    vt_.emplace_back();
    return static_cast<Index>(x_.size() - 1);
  }

  Index add_triangle(Index a, Index b, Index c) {
    tri_.push_back({a, b, c});
    tdead_.push_back(0);
    const auto id = static_cast<Index>(tri_.size() - 1);
    for (Index v : {a, b, c}) vt_[static_cast<std::size_t>(v)].push_back(id);
    return id;
  }

  void detach(Index v, Index t) {
    auto& list = vt_[static_cast<std::size_t>(v)];
    list.erase(std::find(list.begin(), list.end(), t));
  }

  void remove_triangle(Index t) {
    tdead_[static_cast<std::size_t>(t)] = 1;
    for (Index v : tri_[static_cast<std::size_t>(t)]) detach(v, t);
  }

  const Vec2& X(Index v) const { return x_[static_cast<std::size_t>(v)]; }
  const Sym2& M(Index v) const { return met_[static_cast<std::size_t>(v)]; }
  const Sym2& L(Index v) const { return log_[static_cast<std::size_t>(v)]; }
  const Triangle& T(Index t) const { return tri_[static_cast<std::size_t>(t)]; }
  const std::vector<Index>& VT(Index v) const { return vt_[static_cast<std::size_t>(v)]; }
  bool is_boundary_edge(Index a, Index b) const { return btag_.count(edge_key(a, b)) != 0; }

  double length(Index a, Index b) const { return edge_length_in_metric(X(b) - X(a), M(a), M(b)); }

  double tri_quality(Index a, Index b, Index c) const {
    return quality_in(X(a), X(b), X(c), log_mean(L(a), L(b), L(c)));
  }

  /// Triangles incident to edge a-b.
  int edge_triangles(Index a, Index b, std::array<Index, 2>& out) const {
    int n = 0;
    for (Index t : VT(a)) {
      const Triangle& tr = T(t);
      if (tr[0] == b || tr[1] == b || tr[2] == b) {
        if (n < 2) out[static_cast<std::size_t>(n)] = t;
        ++n;
      }
    }
    return n;
  }

  std::vector<Index> neighbors(Index v) const {
    std::vector<Index> out;
    for (Index t : VT(v))
      for (Index w : T(t))
        if (w != v) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<Edge> collect_edges(bool long_edges) const {
    std::vector<Edge> edges;
    for (std::size_t t = 0; t < tri_.size(); ++t) {
      if (tdead_[t]) continue;
      const Triangle& tr = tri_[t];
      for (int i = 0; i < 3; ++i) {
        const Index a = tr[static_cast<std::size_t>(i)];
        const Index b = tr[static_cast<std::size_t>((i + 1) % 3)];
        // each interior edge appears twice; keep the a<b copy, or the only copy on the boundary
        if (a > b && !is_boundary_edge(a, b)) continue;
        const double l = length(a, b);
        if (long_edges ? l > opt_.split_threshold : l < opt_.collapse_threshold) edges.push_back({l, a, b});
      }
    }
    std::sort(edges.begin(), edges.end(), [long_edges](const Edge& e, const Edge& f) {
      if (e.length != f.length) return long_edges ? e.length > f.length : e.length < f.length;
      return std::pair(std::min(e.a, e.b), std::max(e.a, e.b)) < std::pair(std::min(f.a, f.b), std::max(f.a, f.b));
    });
    return edges;
  }

  bool edge_alive(Index a, Index b) const {
    if (vdead_[static_cast<std::size_t>(a)] || vdead_[static_cast<std::size_t>(b)]) return false;
    std::array<Index, 2> tmp{};
    return edge_triangles(a, b, tmp) > 0;
  }

  void split(Index a, Index b);
  bool try_collapse(Index a, Index b, bool repair = false);
  bool try_snap(Index t);
  bool try_flip(Index a, Index b);
  bool try_smooth(Index v);
};

void Workspace::split(Index a, Index b) {
  const Vec2 e = X(b) - X(a);
  const double la = std::sqrt(quad_form(M(a), e));
  const double lb = std::sqrt(quad_form(M(b), e));
  const double s = metric_midpoint(la, lb);
  const Vec2 p = X(a) + s * e;
  const auto bt = btag_.find(edge_key(a, b));
  VertexClass c;
  int tag = 0;
  if (bt != btag_.end()) {
    tag = bt->second;
    c = {VertexKind::boundary, tag};
  }
  const Index m = add_vertex(p, c);

  std::array<Index, 2> ts{};
  const int n = edge_triangles(a, b, ts);
  for (int k = 0; k < n; ++k) {
    const Index t = ts[static_cast<std::size_t>(k)];
    Triangle tr = T(t);
    // rotate so that tr[0] -> tr[1] is the split edge
    while (!((tr[0] == a && tr[1] == b) || (tr[0] == b && tr[1] == a))) std::rotate(tr.begin(), tr.begin() + 1, tr.end());
    const Index p0 = tr[0], p1 = tr[1], apex = tr[2];
    remove_triangle(t);
    add_triangle(p0, m, apex);
    add_triangle(m, p1, apex);
  }
  if (bt != btag_.end()) {
    btag_.erase(bt);
    btag_[edge_key(a, m)] = tag;
    btag_[edge_key(m, b)] = tag;
  }
  ++counts.splits;
}

std::size_t Workspace::split_pass() {
  std::size_t n = 0;
  for (const Edge& e : collect_edges(true)) {
    if (!edge_alive(e.a, e.b)) continue;
    if (length(e.a, e.b) <= opt_.split_threshold) continue;
    split(e.a, e.b);
    ++n;
  }
  return n;
}

bool Workspace::try_collapse(Index a, Index b, bool repair) {
  const VertexClass& ca = cls_[static_cast<std::size_t>(a)];
  if (ca.kind == VertexKind::corner) return false;
  const bool boundary_edge = is_boundary_edge(a, b);
  Index other = -1;  // a's other boundary neighbour
  if (ca.kind == VertexKind::boundary) {
    if (!boundary_edge) return false;
    for (const auto& w : neighbors(a))
      if (w != b && is_boundary_edge(a, w)) other = w;
    if (other < 0) return false;
    const Vec2 u = X(b) - X(a);
    const Vec2 w = X(other) - X(a);
    if (std::abs(cross(u, w)) > 1e-10 * norm(u) * norm(w) || dot(u, w) >= 0.0) return false;
  }

  std::array<Index, 2> ts{};
  const int nt = edge_triangles(a, b, ts);
  if (nt < 1 || nt > 2) return false;

  // link condition: common neighbours are exactly the apices of the edge triangles
  const auto na = neighbors(a);
  const auto nb = neighbors(b);
  std::vector<Index> common;
  std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
  if (static_cast<int>(common.size()) != nt) return false;
  // an interior vertex collapsing onto the boundary through an interior edge
  // must not pinch a boundary vertex between two boundary edges
  if (ca.kind == VertexKind::interior && nt == 1) return false;

  double old_min = 1.0;
  double new_min = 1.0;
  for (Index t : VT(a)) {
    const Triangle& tr = T(t);
    old_min = std::min(old_min, tri_quality(tr[0], tr[1], tr[2]));
    if (t == ts[0] || (nt == 2 && t == ts[1])) continue;
    std::array<Vec2, 3> p{X(tr[0]), X(tr[1]), X(tr[2])};
    std::array<Index, 3> id{tr[0], tr[1], tr[2]};
    for (int i = 0; i < 3; ++i)
      if (id[static_cast<std::size_t>(i)] == a) {
        id[static_cast<std::size_t>(i)] = b;
        p[static_cast<std::size_t>(i)] = X(b);
      }
    const double area2 = cross(p[1] - p[0], p[2] - p[0]);
    if (area2 <= min_positive_area_tol(p[0], p[1], p[2])) return false;
    new_min = std::min(new_min, tri_quality(id[0], id[1], id[2]));
  }
  if (repair ? !(new_min > old_min) : (new_min < opt_.min_quality && new_min < old_min)) return false;
  for (Index w : na) {
    if (repair) break;
    if (w == b) continue;
    if (std::find(common.begin(), common.end(), w) != common.end()) continue;
    if (length(b, w) > opt_.split_threshold) return false;
  }

  for (int k = 0; k < nt; ++k) remove_triangle(ts[static_cast<std::size_t>(k)]);
  const std::vector<Index> moved = VT(a);
  for (Index t : moved) {
    for (Index& v : tri_[static_cast<std::size_t>(t)])
      if (v == a) v = b;
    vt_[static_cast<std::size_t>(b)].push_back(t);
  }
  vt_[static_cast<std::size_t>(a)].clear();
  vdead_[static_cast<std::size_t>(a)] = 1;
  if (boundary_edge) {
    const int tag = btag_.at(edge_key(a, other));
    btag_.erase(edge_key(a, b));
    btag_.erase(edge_key(a, other));
    btag_[edge_key(b, other)] = tag;
  }
  ++counts.collapses;
  return true;
}

std::size_t Workspace::collapse_pass() {
  std::size_t n = 0;
  for (const Edge& e : collect_edges(false)) {
    if (!edge_alive(e.a, e.b)) continue;
    if (length(e.a, e.b) >= opt_.collapse_threshold) continue;
    if (try_collapse(e.a, e.b) || try_collapse(e.b, e.a)) ++n;
  }
  return n;
}

// Removes elements below min_quality by collapsing one of their edges, shortest
// first, whenever that raises the local minimum quality.
std::size_t Workspace::repair_pass() {
  std::size_t n = 0;
  for (std::size_t t = 0; t < tri_.size(); ++t) {
    if (tdead_[t]) continue;
    const Triangle tr = tri_[t];
    if (tri_quality(tr[0], tr[1], tr[2]) >= opt_.min_quality) continue;
    std::array<Edge, 3> es{};
    for (int i = 0; i < 3; ++i) {
      const Index a = tr[static_cast<std::size_t>(i)], b = tr[static_cast<std::size_t>((i + 1) % 3)];
      es[static_cast<std::size_t>(i)] = {length(a, b), a, b};
    }
    std::sort(es.begin(), es.end(), [](const Edge& e, const Edge& f) { return e.length < f.length; });
    for (const Edge& e : es)
      if (try_collapse(e.a, e.b, true) || try_collapse(e.b, e.a, true)) {
        ++n;
        goto next;
      }
    if (try_snap(static_cast<Index>(t))) ++n;
  next:;
  }
  return n;
}

// Moves the vertex opposite the longest edge of t onto that edge, deleting t and
// splitting the element across the edge, if any. Accepted only if the local
// minimum quality rises.
bool Workspace::try_snap(Index t) {
  Triangle tr = T(t);
  auto sq = [&](int i) { return norm_squared(X(tr[static_cast<std::size_t>((i + 2) % 3)]) - X(tr[static_cast<std::size_t>((i + 1) % 3)])); };
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (sq(i) > sq(k)) k = i;
  std::rotate(tr.begin(), tr.begin() + k, tr.end());
  const Index c = tr[0], a = tr[1], b = tr[2];
  if (cls_[static_cast<std::size_t>(c)].kind != VertexKind::interior) return false;
  const Vec2 e = X(b) - X(a);
  const double s = dot(X(c) - X(a), e) / norm_squared(e);
  if (!(s > 0.05 && s < 0.95)) return false;
  const Vec2 p = X(a) + s * e;

  const auto bt = btag_.find(edge_key(a, b));
  std::array<Index, 2> ts{};
  const int nt = edge_triangles(a, b, ts);
  Index other = -1, d = -1;
  if (bt != btag_.end() && nt != 1) return false;
  if (bt == btag_.end()) {
    if (nt != 2) return false;
    other = ts[0] == t ? ts[1] : ts[0];
    for (Index w : T(other))
      if (w != a && w != b) d = w;
    const auto nc = neighbors(c);
    if (std::binary_search(nc.begin(), nc.end(), d)) return false;
  }

  const Sym2 lp = bg_.log_at(p);
  auto q_at = [&](Index u, Index v, Index w) {
    const Vec2 pu = u == c ? p : X(u), pv = v == c ? p : X(v), pw = w == c ? p : X(w);
    return quality_in(pu, pv, pw, log_mean(u == c ? lp : L(u), v == c ? lp : L(v), w == c ? lp : L(w)));
  };
  double old_min = 1.0, new_min = 1.0;
  for (Index u : VT(c)) {
    const Triangle& r = T(u);
    old_min = std::min(old_min, tri_quality(r[0], r[1], r[2]));
    if (u == t) continue;
    const Vec2 p0 = r[0] == c ? p : X(r[0]), p1 = r[1] == c ? p : X(r[1]), p2 = r[2] == c ? p : X(r[2]);
    if (cross(p1 - p0, p2 - p0) <= min_positive_area_tol(p0, p1, p2)) return false;
    new_min = std::min(new_min, q_at(r[0], r[1], r[2]));
  }
  if (other >= 0) {
    const Triangle& r = T(other);
    old_min = std::min(old_min, tri_quality(r[0], r[1], r[2]));
    for (const auto& [u, v] : {std::pair(b, c), std::pair(c, a)}) {
      const Vec2 pu = u == c ? p : X(u), pv = v == c ? p : X(v);
      if (cross(pv - pu, X(d) - pu) <= min_positive_area_tol(pu, pv, X(d))) return false;
      new_min = std::min(new_min, q_at(u, v, d));
    }
  }
  if (!(new_min > old_min)) return false;

  remove_triangle(t);
  x_[static_cast<std::size_t>(c)] = p;
  log_[static_cast<std::size_t>(c)] = lp;
  met_[static_cast<std::size_t>(c)] = exp_sym(lp);
  if (other >= 0) {
    remove_triangle(other);
    add_triangle(b, c, d);
    add_triangle(c, a, d);
  } else {
    const int tag = bt->second;
    btag_.erase(bt);
    btag_[edge_key(a, c)] = tag;
    btag_[edge_key(c, b)] = tag;
    cls_[static_cast<std::size_t>(c)] = {VertexKind::boundary, tag};
  }
  ++counts.collapses;
  return true;
}

bool Workspace::try_flip(Index a, Index b) {
  if (is_boundary_edge(a, b)) return false;
  std::array<Index, 2> ts{};
  if (edge_triangles(a, b, ts) != 2) return false;
  Index t1 = ts[0], t2 = ts[1];
  Triangle r1 = T(t1);
  while (r1[0] != a) std::rotate(r1.begin(), r1.begin() + 1, r1.end());
  if (r1[1] != b) {
    std::swap(t1, t2);
    r1 = T(t1);
    while (r1[0] != a) std::rotate(r1.begin(), r1.begin() + 1, r1.end());
  }
  if (r1[1] != b) return false;
  const Index c = r1[2];
  Triangle r2 = T(t2);
  while (r2[0] != b) std::rotate(r2.begin(), r2.begin() + 1, r2.end());
  if (r2[1] != a) return false;
  const Index d = r2[2];
  if (c == d) return false;
  for (Index t : VT(c))
    for (Index w : T(t))
      if (w == d) return false;

  const Vec2 &pa = X(a), &pb = X(b), &pc = X(c), &pd = X(d);
  if (cross(pd - pa, pc - pa) <= min_positive_area_tol(pa, pd, pc)) return false;
  if (cross(pb - pd, pc - pd) <= min_positive_area_tol(pd, pb, pc)) return false;

  const Sym2 m = exp_sym(0.25 * (L(a) + L(b) + L(c) + L(d)));
  // in-circle test in the frame where m is the identity
  const Sym2 h = sqrt_spd(m);
  const Vec2 ta = h * pa, tb = h * pb, tc = h * pc, td = h * pd;
  const Vec2 ad = ta - td, bd = tb - td, cd = tc - td;
  const double incircle = (norm_squared(ad)) * cross(bd, cd) - norm_squared(bd) * cross(ad, cd) +
                          norm_squared(cd) * cross(ad, bd);
  const double scale = std::max({norm_squared(ad), norm_squared(bd), norm_squared(cd)});
  if (!(incircle > 1e-10 * scale * scale)) return false;

  const double old_min = std::min(quality_in(pa, pb, pc, m), quality_in(pb, pa, pd, m));
  const double new_min = std::min(quality_in(pa, pd, pc, m), quality_in(pd, pb, pc, m));
  if (new_min <= old_min) return false;

  detach(a, t2);
  detach(b, t1);
  tri_[static_cast<std::size_t>(t1)] = {a, d, c};
  tri_[static_cast<std::size_t>(t2)] = {d, b, c};
  vt_[static_cast<std::size_t>(c)].push_back(t2);
  vt_[static_cast<std::size_t>(d)].push_back(t1);
  ++counts.flips;
  return true;
}

std::size_t Workspace::flip_pass() {
  std::size_t total = 0;
  for (int round = 0; round < 4; ++round) {
    std::size_t n = 0;
    for (std::size_t t = 0; t < tri_.size(); ++t) {
      if (tdead_[t]) continue;
      for (int i = 0; i < 3; ++i) {
        const Triangle& tr = tri_[t];
        const Index a = tr[static_cast<std::size_t>(i)];
        const Index b = tr[static_cast<std::size_t>((i + 1) % 3)];
        if (a < b && try_flip(a, b)) {
          ++n;
          break;
        }
      }
    }
    total += n;
    if (n == 0) break;
  }
  return total;
}

bool Workspace::try_smooth(Index v) {
  if (cls_[static_cast<std::size_t>(v)].kind != VertexKind::interior) return false;
  const auto ring = neighbors(v);
  if (ring.empty()) return false;
  Vec2 target{};
  for (Index w : ring) {
    const double l = length(w, v);
    if (!(l > 0.0)) return false;
    target += X(w) + (1.0 / l) * (X(v) - X(w));
  }
  target *= 1.0 / static_cast<double>(ring.size());

  double old_min = 1.0;
  for (Index t : VT(v)) {
    const Triangle& tr = T(t);
    old_min = std::min(old_min, tri_quality(tr[0], tr[1], tr[2]));
  }

  const Vec2 origin = X(v);
  const Sym2 old_m = M(v), old_l = L(v);
  for (double w = 1.0; w >= 0.24; w *= 0.5) {
    const Vec2 p = origin + w * (target - origin);
    x_[static_cast<std::size_t>(v)] = p;
    log_[static_cast<std::size_t>(v)] = bg_.log_at(p);
    met_[static_cast<std::size_t>(v)] = exp_sym(L(v));
    bool ok = true;
    double new_min = 1.0;
    for (Index t : VT(v)) {
      const Triangle& tr = T(t);
      const Vec2 &p0 = X(tr[0]), &p1 = X(tr[1]), &p2 = X(tr[2]);
      if (cross(p1 - p0, p2 - p0) <= min_positive_area_tol(p0, p1, p2)) {
        ok = false;
        break;
      }
      new_min = std::min(new_min, tri_quality(tr[0], tr[1], tr[2]));
    }
    if (ok && new_min >= old_min) {
      ++counts.moves;
      return true;
    }
  }
  x_[static_cast<std::size_t>(v)] = origin;
  met_[static_cast<std::size_t>(v)] = old_m;
  log_[static_cast<std::size_t>(v)] = old_l;
  return false;
}

std::size_t Workspace::smooth_pass() {
  std::size_t n = 0;
  for (std::size_t v = 0; v < x_.size(); ++v)
    if (!vdead_[v] && try_smooth(static_cast<Index>(v))) ++n;
  return n;
}

double Workspace::out_of_range_fraction() const {
  std::size_t total = 0, bad = 0;
  for (std::size_t t = 0; t < tri_.size(); ++t) {
    if (tdead_[t]) continue;
    const Triangle& tr = tri_[t];
    for (int i = 0; i < 3; ++i) {
      const Index a = tr[static_cast<std::size_t>(i)];
      const Index b = tr[static_cast<std::size_t>((i + 1) % 3)];
      if (a > b && !is_boundary_edge(a, b)) continue;
      ++total;
      const double l = length(a, b);
      if (l < opt_.collapse_threshold || l > opt_.split_threshold) ++bad;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(total);
}

TriMesh Workspace::to_mesh(std::vector<Sym2>* metrics) const {
  std::vector<Index> map(x_.size(), -1);
  std::vector<Vec2> verts;
  for (std::size_t v = 0; v < x_.size(); ++v) {
    if (vdead_[v] || vt_[v].empty()) continue;
    map[v] = static_cast<Index>(verts.size());
    verts.push_back(x_[v]);
    if (metrics) metrics->push_back(met_[v]);
  }
  std::vector<Triangle> tris;
  std::vector<BoundaryEdge> bnd;
  for (std::size_t t = 0; t < tri_.size(); ++t) {
    if (tdead_[t]) continue;
    const Triangle& tr = tri_[t];
    tris.push_back({map[static_cast<std::size_t>(tr[0])], map[static_cast<std::size_t>(tr[1])],
                    map[static_cast<std::size_t>(tr[2])]});
    for (int i = 0; i < 3; ++i) {
      const Index a = tr[static_cast<std::size_t>(i)];
      const Index b = tr[static_cast<std::size_t>((i + 1) % 3)];
      const auto it = btag_.find(edge_key(a, b));
      if (it != btag_.end())
        bnd.push_back({{map[static_cast<std::size_t>(a)], map[static_cast<std::size_t>(b)]}, it->second});
    }
  }
  return build_mesh(std::move(verts), std::move(tris), std::move(bnd));
}

std::vector<double> histogram_bins(const RemeshOptions& o) {
  return {0.0, 0.25, 0.5, o.collapse_threshold, 0.85, 1.0, 1.2, o.split_threshold, 2.0, 4.0,
          std::numeric_limits<double>::infinity()};
}

}  // namespace

void validate(const RemeshOptions& o) {
  if (!(o.collapse_threshold > 0.0 && o.collapse_threshold < 1.0 && o.split_threshold > 1.0))
    throw std::invalid_argument("remesh thresholds must satisfy 0 < collapse < 1 < split");
  if (std::abs(o.collapse_threshold * o.split_threshold - 1.0) > 1e-9)
    throw std::invalid_argument("remesh thresholds must be reciprocal");
  if (o.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be positive");
  if (o.smoothing_passes < 0) throw std::invalid_argument("smoothing_passes must be non-negative");
  if (!(o.min_quality >= 0.0 && o.min_quality < 1.0)) throw std::invalid_argument("min_quality must lie in [0, 1)");
  if (!(o.stop_fraction >= 0.0 && o.stop_fraction < 1.0)) throw std::invalid_argument("stop_fraction must lie in [0, 1)");
}

BackgroundMetric::BackgroundMetric(const TriMesh& mesh, const MetricField& field) : mesh_(mesh) {
  if (mesh.empty()) throw std::invalid_argument("background mesh is empty");
  if (field.size() != mesh.num_vertices()) throw std::invalid_argument("metric field does not match the mesh");
  logs_.reserve(field.size());
  for (const Sym2& m : field.tensors) {
    require_spd(m, "background metric");
    logs_.push_back(log_spd(m));
  }
  box_ = mesh.bounding_box();
  const double n = std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0);
  const double aspect = box_.height() > 0.0 ? box_.width() / box_.height() : 1.0;
  nx_ = std::clamp(static_cast<int>(std::ceil(n * std::sqrt(aspect))), 1, 2048);
  ny_ = std::clamp(static_cast<int>(std::ceil(n / std::sqrt(aspect))), 1, 2048);

  const double dx = box_.width() / nx_, dy = box_.height() / ny_;
  auto cell_range = [&](double lo, double hi, double o, double d, int count) {
    const int a = std::clamp(static_cast<int>(std::floor((lo - o) / d)), 0, count - 1);
    const int b = std::clamp(static_cast<int>(std::floor((hi - o) / d)), 0, count - 1);
    return std::pair(a, b);
  };
  std::vector<std::vector<Index>> cells(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tr = mesh.triangle(static_cast<Index>(t));
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (Index v : tr) {
      const Vec2& p = mesh.vertex(v);
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
    }
    const auto [i0, i1] = cell_range(xlo, xhi, box_.x0, dx, nx_);
    const auto [j0, j1] = cell_range(ylo, yhi, box_.y0, dy, ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)]
            .push_back(static_cast<Index>(t));
  }
  cell_offset_.assign(cells.size() + 1, 0);
  for (std::size_t c = 0; c < cells.size(); ++c) cell_offset_[c + 1] = cell_offset_[c] + cells[c].size();
  cell_tris_.reserve(cell_offset_.back());
  for (const auto& c : cells) cell_tris_.insert(cell_tris_.end(), c.begin(), c.end());
}

std::pair<Index, std::array<double, 3>> BackgroundMetric::locate(const Vec2& p) const {
  auto bary = [&](Index t) {
    const Triangle& tr = mesh_.triangle(t);
    const Vec2 &a = mesh_.vertex(tr[0]), &b = mesh_.vertex(tr[1]), &c = mesh_.vertex(tr[2]);
    const double area2 = cross(b - a, c - a);
    const double l1 = cross(p - a, c - a) / area2;
    const double l2 = cross(b - a, p - a) / area2;
    return std::array<double, 3>{1.0 - l1 - l2, l1, l2};
  };
  const double dx = box_.width() / nx_, dy = box_.height() / ny_;
  const int ci = std::clamp(static_cast<int>(std::floor((p.x - box_.x0) / dx)), 0, nx_ - 1);
  const int cj = std::clamp(static_cast<int>(std::floor((p.y - box_.y0) / dy)), 0, ny_ - 1);

  Index best = -1;
  std::array<double, 3> best_l{};
  double best_score = -std::numeric_limits<double>::infinity();
  for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
    for (int j = cj - ring; j <= cj + ring; ++j) {
      for (int i = ci - ring; i <= ci + ring; ++i) {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
        const std::size_t c = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
        for (std::size_t k = cell_offset_[c]; k < cell_offset_[c + 1]; ++k) {
          const Index t = cell_tris_[k];
          const auto l = bary(t);
          const double score = std::min({l[0], l[1], l[2]});
          if (score > best_score) {
            best_score = score;
            best = t;
            best_l = l;
          }
        }
      }
    }
    if (best >= 0 && best_score >= -1e-10) break;
    if (best >= 0 && ring >= 1) break;
  }
  for (double& v : best_l) v = std::max(v, 0.0);
  const double s = best_l[0] + best_l[1] + best_l[2];
  for (double& v : best_l) v /= s;
  return {best, best_l};
}

Sym2 BackgroundMetric::log_at(const Vec2& p) const {
  const auto [t, l] = locate(p);
  const Triangle& tr = mesh_.triangle(t);
  Sym2 acc;
  for (int i = 0; i < 3; ++i) acc += l[static_cast<std::size_t>(i)] * logs_[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])];
  return acc;
}

double element_quality(const std::array<Vec2, 3>& p, const Sym2& metric) {
  require_spd(metric, "element_quality");
  return quality_in(p[0], p[1], p[2], metric);
}

QualityReport quality_report(const TriMesh& mesh, const MetricField& field, const RemeshOptions& options) {
  if (field.size() != mesh.num_vertices()) throw std::invalid_argument("metric field does not match the mesh");
  QualityReport r;
  r.bin_edges = histogram_bins(options);
  r.edge_length_counts.assign(r.bin_edges.size() - 1, 0);
  std::vector<Sym2> logs;
  logs.reserve(field.size());
  for (const Sym2& m : field.tensors) logs.push_back(log_spd(m));

  const auto edges = mesh.edges();
  r.num_edges = edges.size();
  std::size_t bad = 0;
  for (const auto& e : edges) {
    const double l = metric_edge_length(mesh, field, e[0], e[1]);
    const auto it = std::upper_bound(r.bin_edges.begin(), r.bin_edges.end(), l);
    const auto bin = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - r.bin_edges.begin() - 1));
    ++r.edge_length_counts[std::min(bin, r.edge_length_counts.size() - 1)];
    if (l < options.collapse_threshold || l > options.split_threshold) ++bad;
  }
  r.out_of_range_fraction = edges.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(edges.size());

  r.quality.reserve(mesh.num_triangles());
  r.metric_volumes.reserve(mesh.num_triangles());
  double sum = 0.0;
  r.q_min = mesh.empty() ? 0.0 : 1.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tr = mesh.triangle(static_cast<Index>(t));
    const auto i0 = static_cast<std::size_t>(tr[0]), i1 = static_cast<std::size_t>(tr[1]),
               i2 = static_cast<std::size_t>(tr[2]);
    const double q = quality_in(mesh.vertex(tr[0]), mesh.vertex(tr[1]), mesh.vertex(tr[2]),
                                log_mean(logs[i0], logs[i1], logs[i2]));
    r.quality.push_back(q);
    sum += q;
    r.q_min = std::min(r.q_min, q);
    r.metric_volumes.push_back(metric_volume(mesh, field, static_cast<Index>(t)));
  }
  r.q_mean = mesh.empty() ? 0.0 : sum / static_cast<double>(mesh.num_triangles());
  return r;
}

RemeshResult adapt_mesh(const TriMesh& mesh, const MetricField& field, const RemeshOptions& options) {
  validate(options);
  const BackgroundMetric bg(mesh, field);
  Workspace ws(mesh, field, bg, options);
  std::vector<double> history;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (int k = 0; k < 12; ++k) {
      const std::size_t n = ws.split_pass();
      ws.flip_pass();
      if (n == 0) break;
    }
    for (int k = 0; k < 12; ++k) {
      const std::size_t n = ws.collapse_pass();
      ws.flip_pass();
      if (n == 0) break;
    }
    if (ws.repair_pass() > 0) ws.flip_pass();
    for (int k = 0; k < options.smoothing_passes; ++k) {
      ws.smooth_pass();
      ws.flip_pass();
    }
    ++ws.counts.sweeps;
    if (options.check_each_sweep) (void)ws.to_mesh(nullptr);
    const double frac = ws.out_of_range_fraction();
    history.push_back(frac);
    if (frac < options.stop_fraction) break;
  }

  RemeshResult out;
  std::vector<Sym2> metrics;
  out.mesh = ws.to_mesh(&metrics);
  out.metric = field;
  out.metric.tensors = std::move(metrics);
  out.report = quality_report(out.mesh, out.metric, options);
  out.report.operations = ws.counts;
  out.report.sweep_out_of_range = std::move(history);
  return out;
}

}  // namespace anisomesh
