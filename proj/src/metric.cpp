#include "anisomesh/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anisomesh/quadrature.hpp"

namespace anisomesh {

namespace {

constexpr int kVolumeRuleDegree = 6;

void check_m_p(int m, double p) {
  if (m != 0 && m != 1) throw std::invalid_argument("m must be 0 or 1");
  if (std::isnan(p) || !(p > 0.0)) throw std::invalid_argument("p must lie in (0, inf]");
}

/// Scalar factor det^a * s^b, where s is either the trace or the spectral norm.
double monitor_scale(const Sym2& h, int m, double p, double s) {
  if (std::isinf(p)) return m == 0 ? 1.0 : s;
  const double denom = 2.0 + p * (2.0 - m);
  return std::exp(-std::log(det(h)) / denom + m * p * std::log(s) / denom);
}

}  // namespace

const char* to_string(MonitorVariant v) {
  return v == MonitorVariant::trace ? "new" : "huang-russell";
}

MonitorVariant monitor_variant_from_name(const std::string& name) {
  if (name == "new" || name == "trace") return MonitorVariant::trace;
  if (name == "huang-russell" || name == "hr" || name == "spectral") return MonitorVariant::spectral;
  throw std::invalid_argument("unknown monitor variant '" + name + "'");
}

void require_spd(const Sym2& m, const char* what) {
  if (!is_spd(m)) throw std::invalid_argument(std::string(what) + ": tensor is not symmetric positive definite");
}

Sym2 regularize_hessian(const Sym2& H, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("flooring parameter alpha must be positive");
  return spectral_map(H, [alpha](double l) { return alpha + std::abs(l); });
}

Sym2 monitor(const Sym2& Hreg, int m, double p) {
  check_m_p(m, p);
  require_spd(Hreg, "monitor");
  return monitor_scale(Hreg, m, p, trace(Hreg)) * Hreg;
}

Sym2 monitor_hr(const Sym2& Hreg, int m, double p) {
  check_m_p(m, p);
  require_spd(Hreg, "monitor_hr");
  return monitor_scale(Hreg, m, p, eigen(Hreg).l1) * Hreg;
}

Sym2 monitor(const Sym2& Hreg, const MetricDescriptor& d) {
  return d.variant == MonitorVariant::trace ? monitor(Hreg, d.m, d.p) : monitor_hr(Hreg, d.m, d.p);
}

double default_alpha(std::span<const Sym2> hessians) {
  if (hessians.empty()) return 1e-8;
  std::vector<double> norms;
  norms.reserve(hessians.size());
  for (const Sym2& h : hessians) {
    const SymEigen e = eigen(h);
    norms.push_back(std::max(std::abs(e.l1), std::abs(e.l2)));
  }
  const auto mid = norms.begin() + static_cast<std::ptrdiff_t>(norms.size() / 2);
  std::nth_element(norms.begin(), mid, norms.end());
  return std::max(1e-8, 0.01 * *mid);
}

double default_alpha(std::span<const Sym2> hessians, std::span<const double> weights) {
  if (weights.size() != hessians.size()) throw std::invalid_argument("default_alpha: one weight per tensor required");
  if (hessians.empty()) return 1e-8;
  std::vector<std::pair<double, double>> nw;
  nw.reserve(hessians.size());
  double total = 0.0;
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    const SymEigen e = eigen(hessians[i]);
    nw.emplace_back(std::max(std::abs(e.l1), std::abs(e.l2)), weights[i]);
    total += weights[i];
  }
  if (!(total > 0.0)) return default_alpha(hessians);
  std::sort(nw.begin(), nw.end());
  double acc = 0.0;
  double median = nw.back().first;
  for (const auto& [n, w] : nw) {
    acc += w;
    if (acc >= 0.5 * total) {
      median = n;
      break;
    }
  }
  return std::max(1e-8, 0.01 * median);
}

std::vector<double> lumped_vertex_areas(const TriMesh& mesh) {
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.area(static_cast<Index>(t)) / 3.0;
    for (Index v : mesh.triangle(static_cast<Index>(t))) w[static_cast<std::size_t>(v)] += a;
  }
  return w;
}

MetricField build_metric(const TriMesh& mesh, std::span<const Sym2> vertex_hessians,
                         const BuildMetricOptions& options) {
  if (mesh.empty()) throw std::invalid_argument("build_metric: empty mesh");
  if (vertex_hessians.size() != mesh.num_vertices())
    throw std::invalid_argument("build_metric: one Hessian per vertex required");
  if (!(options.target_elements >= 1.0)) throw std::invalid_argument("build_metric: target must be >= 1");
  check_m_p(options.m, options.p);
  const double alpha =
      options.alpha ? *options.alpha : default_alpha(vertex_hessians, lumped_vertex_areas(mesh));
  if (!(alpha > 0.0)) throw std::invalid_argument("flooring parameter alpha must be positive");

  MetricField field;
  field.descriptor = {options.m, options.p, options.variant, alpha};
  field.target_elements = options.target_elements;
  field.tensors.reserve(vertex_hessians.size());
  for (const Sym2& h : vertex_hessians)
    field.tensors.push_back(monitor(regularize_hessian(h, alpha), field.descriptor));

  double sigma = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    sigma += metric_volume(mesh, field, static_cast<Index>(t));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::runtime_error("build_metric: invalid metric volume");
  field.sigma = sigma;
  field.theta = kUnitTriangleArea * options.target_elements / sigma;
  for (Sym2& m : field.tensors) m *= field.theta;
  return field;
}

MetricField constant_metric(const TriMesh& mesh, const Sym2& m) {
  require_spd(m, "constant_metric");
  MetricField field;
  field.tensors.assign(mesh.num_vertices(), m);
  double sigma = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    sigma += metric_volume(mesh, field, static_cast<Index>(t));
  field.sigma = sigma;
  field.target_elements = sigma / kUnitTriangleArea;
  return field;
}

Sym2 metric_interpolate(const Sym2& a, const Sym2& b, double t) {
  require_spd(a, "metric_interpolate");
  require_spd(b, "metric_interpolate");
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return exp_sym((1.0 - t) * log_spd(a) + t * log_spd(b));
}

Sym2 metric_from_logs(std::span<const Sym2> logs, std::span<const double> weights) {
  Sym2 acc;
  for (std::size_t i = 0; i < logs.size(); ++i) acc += weights[i] * logs[i];
  return exp_sym(acc);
}

double edge_length_in_metric(const Vec2& e, const Sym2& ma, const Sym2& mb) {
  const double la = std::sqrt(std::max(0.0, quad_form(ma, e)));
  const double lb = std::sqrt(std::max(0.0, quad_form(mb, e)));
  if (std::abs(la - lb) < 1e-12 * la || lb <= 0.0 || la <= 0.0) return la;
  return (la - lb) / std::log(la / lb);
}

double metric_edge_length(const TriMesh& mesh, const MetricField& field, Index from, Index to) {
  const auto n = static_cast<Index>(mesh.num_vertices());
  if (from < 0 || from >= n || to < 0 || to >= n || field.size() != mesh.num_vertices())
    throw std::out_of_range("metric_edge_length: invalid vertex");
  return edge_length_in_metric(mesh.vertex(to) - mesh.vertex(from), field[from], field[to]);
}

double triangle_metric_volume(const std::array<Vec2, 3>& p, const std::array<Sym2, 3>& m) {
  // sqrt(det exp(sum l_i log M_i)) = exp(1/2 sum l_i log det M_i)
  std::array<double, 3> half_log_det{};
  for (int i = 0; i < 3; ++i) half_log_det[i] = 0.5 * std::log(det(m[i]));
  const double area = 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0]));
  const double hi = *std::max_element(half_log_det.begin(), half_log_det.end());
  const QuadratureRule& rule = triangle_rule(kVolumeRuleDegree);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.points[q];
    acc += rule.weights[q] *
           std::exp(l[0] * half_log_det[0] + l[1] * half_log_det[1] + l[2] * half_log_det[2] - hi);
  }
  return area * acc * std::exp(hi);
}

double metric_volume(const TriMesh& mesh, const MetricField& field, Index triangle_id) {
  if (triangle_id < 0 || static_cast<std::size_t>(triangle_id) >= mesh.num_triangles())
    throw std::out_of_range("metric_volume: invalid triangle id");
  const Triangle& t = mesh.triangle(triangle_id);
  return triangle_metric_volume({mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2])},
                                {field[t[0]], field[t[1]], field[t[2]]});
}

}  // namespace anisomesh
