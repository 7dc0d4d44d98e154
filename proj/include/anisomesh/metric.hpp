#pragma once

// Regularized Hessians, monitor functions, normalized metric tensor fields
// and the Riemannian helpers used by the remesher.

#include <array>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anisomesh/mesh.hpp"
#include "anisomesh/tensor2.hpp"

namespace anisomesh {

/// Metric area of an equilateral triangle with unit metric edges.
inline const double kUnitTriangleArea = std::numbers::sqrt3 / 4.0;

/// trace: det(H)^a tr(H)^b H.  spectral: the same with tr replaced by the
/// largest eigenvalue (the Huang-Russell monitor).
enum class MonitorVariant { trace, spectral };

const char* to_string(MonitorVariant v);
MonitorVariant monitor_variant_from_name(const std::string& name);

struct MetricDescriptor {
  int m = 0;        // 0: error in L^p, 1: gradient error in L^p
  double p = 2.0;   // (0, inf]
  MonitorVariant variant = MonitorVariant::trace;
  double alpha = 0.0;
};

struct MetricField {
  /// Normalized vertex metrics theta * M.
  std::vector<Sym2> tensors;
  double theta = 1.0;
  /// Integral of sqrt(det M) over the domain, before normalization.
  double sigma = 0.0;
  double target_elements = 0.0;
  MetricDescriptor descriptor;

  std::size_t size() const { return tensors.size(); }
  const Sym2& operator[](Index v) const { return tensors[static_cast<std::size_t>(v)]; }
};

/// alpha I + |H|: eigenvalues replaced by their absolute values, then floored.
/// Throws std::invalid_argument for alpha <= 0.
Sym2 regularize_hessian(const Sym2& H, double alpha);

/// det^{-1/(2+p(2-m))} tr^{mp/(2+p(2-m))} Hreg, with the p = inf limits.
Sym2 monitor(const Sym2& Hreg, int m, double p);
/// Same with the spectral norm in place of the trace.
Sym2 monitor_hr(const Sym2& Hreg, int m, double p);
Sym2 monitor(const Sym2& Hreg, const MetricDescriptor& d);

/// max(1e-8, 0.01 * median_v ||H_v||_2).
double default_alpha(std::span<const Sym2> hessians);
/// Same with the median taken with respect to per-vertex weights (e.g. lumped
/// areas), so the value does not depend on where the vertices cluster.
double default_alpha(std::span<const Sym2> hessians, std::span<const double> weights);

/// One third of the area of every incident triangle.
std::vector<double> lumped_vertex_areas(const TriMesh& mesh);

struct BuildMetricOptions {
  int m = 0;
  double p = 2.0;
  MonitorVariant variant = MonitorVariant::trace;
  /// Unset selects the area-weighted default_alpha(); a set value must be positive.
  std::optional<double> alpha;
  double target_elements = 1000.0;
};

/// Builds theta * monitor(regularize(H_v)) per vertex with theta chosen so
/// that the metric area of the domain equals kUnitTriangleArea * target_elements.
MetricField build_metric(const TriMesh& mesh, std::span<const Sym2> vertex_hessians,
                         const BuildMetricOptions& options);

/// Constant metric on every vertex (theta = 1).
MetricField constant_metric(const TriMesh& mesh, const Sym2& m);

/// exp((1-t) log A + t log B).
Sym2 metric_interpolate(const Sym2& a, const Sym2& b, double t);
/// exp(sum w_i log M_i) from precomputed logarithms.
Sym2 metric_from_logs(std::span<const Sym2> logs, std::span<const double> weights);

/// Length of the segment e under a metric varying geometrically from Ma to Mb.
double edge_length_in_metric(const Vec2& e, const Sym2& ma, const Sym2& mb);
double metric_edge_length(const TriMesh& mesh, const MetricField& field, Index from, Index to);

/// Integral over the triangle of sqrt(det) of the log-Euclidean interpolated metric.
double triangle_metric_volume(const std::array<Vec2, 3>& p, const std::array<Sym2, 3>& m);
double metric_volume(const TriMesh& mesh, const MetricField& field, Index triangle_id);

/// Throws std::invalid_argument unless the tensor is SPD.
void require_spd(const Sym2& m, const char* what);

}  // namespace anisomesh
