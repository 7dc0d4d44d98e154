#pragma once

// Local-modification remesher: split, collapse, flip and smooth until the
// mesh is quasi-uniform (unit edges, equilateral elements) in a metric field.

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include "anisomesh/mesh.hpp"
#include "anisomesh/metric.hpp"

namespace anisomesh {

struct RemeshOptions {
  double split_threshold = std::numbers::sqrt2;
  double collapse_threshold = 1.0 / std::numbers::sqrt2;
  int max_sweeps = 20;
  int smoothing_passes = 2;
  /// Collapses and smoothing moves that would produce an element of lower
  /// quality than this are rejected unless they improve on what they replace.
  double min_quality = 0.1;
  /// Sweeps stop once fewer than this fraction of edges lie outside
  /// [collapse_threshold, split_threshold].
  double stop_fraction = 0.005;
  /// Validate all mesh invariants after every sweep.
  bool check_each_sweep = false;
};

/// Throws std::invalid_argument unless collapse < 1 < split, their product is
/// one, and the counts are sensible.
void validate(const RemeshOptions& options);

struct OperationCounts {
  std::size_t splits = 0;
  std::size_t collapses = 0;
  std::size_t flips = 0;
  std::size_t moves = 0;
  int sweeps = 0;
};

struct QualityReport {
  /// Histogram of metric edge lengths; bin i covers [bin_edges[i], bin_edges[i+1]).
  std::vector<double> bin_edges;
  std::vector<std::size_t> edge_length_counts;
  std::vector<double> metric_volumes;
  /// 4 sqrt(3) |K|_M / sum l_M^2 in the element-averaged metric, in (0, 1].
  std::vector<double> quality;
  double q_mean = 0.0;
  double q_min = 0.0;
  /// Fraction of edges outside [collapse_threshold, split_threshold].
  double out_of_range_fraction = 0.0;
  std::size_t num_edges = 0;
  OperationCounts operations;
  /// out_of_range_fraction measured after each sweep.
  std::vector<double> sweep_out_of_range;
};

/// Metric at arbitrary points, interpolated log-Euclidean from a background
/// mesh carrying vertex metrics.
class BackgroundMetric {
 public:
  BackgroundMetric(const TriMesh& mesh, const MetricField& field);

  Sym2 log_at(const Vec2& p) const;
  Sym2 at(const Vec2& p) const { return exp_sym(log_at(p)); }

  /// Containing triangle (or the nearest when p is outside) and barycentrics.
  std::pair<Index, std::array<double, 3>> locate(const Vec2& p) const;

 private:
  const TriMesh& mesh_;
  std::vector<Sym2> logs_;
  Rect box_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::size_t> cell_offset_;
  std::vector<Index> cell_tris_;
};

/// Quality in a constant metric.
double element_quality(const std::array<Vec2, 3>& p, const Sym2& metric);

/// Quality of every element, evaluated in the log-average of its vertex metrics.
QualityReport quality_report(const TriMesh& mesh, const MetricField& field,
                             const RemeshOptions& options = {});

struct RemeshResult {
  TriMesh mesh;
  /// The input field interpolated to the output vertices.
  MetricField metric;
  QualityReport report;
};

/// Adapts the mesh to the field; the input mesh is the background for all
/// metric queries at new or moved points. Boundary segments and corners are
/// preserved. Throws std::invalid_argument if the field does not match.
RemeshResult adapt_mesh(const TriMesh& mesh, const MetricField& field, const RemeshOptions& options = {});

}  // namespace anisomesh
