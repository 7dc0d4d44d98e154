#pragma once

// Outer adaptation loop (Hessian -> metric -> remesh -> measure) and the
// convergence-study harness.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisomesh/exact_norms.hpp"
#include "anisomesh/metric.hpp"
#include "anisomesh/problems.hpp"
#include "anisomesh/remesher.hpp"

namespace anisomesh {

enum class HessianSource { analytic, recovered };

const char* to_string(HessianSource s);
HessianSource hessian_source_from_name(const std::string& name);

struct AdaptOptions {
  ProblemDef problem = circle_problem();
  int m = 0;
  double p = 2.0;
  MonitorVariant variant = MonitorVariant::trace;
  double target_elements = 4000.0;
  /// 0 selects default_iterations().
  int iterations = 0;
  std::optional<double> alpha;
  HessianSource hessian_source = HessianSource::analytic;
  /// Prescribed error level; recorded only, it does not enter the loop.
  double epsilon = 0.0;
  /// Exponent of the damped element-count feedback.
  double feedback_gamma = 0.7;
  /// Cells per side of the structured starting mesh.
  int initial_divisions = 16;
  /// When false only the final iterate is measured against the oracle; the
  /// other records carry NaN errors.
  bool measure_every_iteration = true;
  RemeshOptions remesh;
  OracleOptions oracle;
};

/// 15 for the circle and quadratic fields, 20 for zigzag and layers, 30 for
/// the layers field with m = 1 and p = inf.
int default_iterations(ProblemId problem, int m, double p);

/// Throws std::invalid_argument on out-of-range fields.
void validate(const AdaptOptions& options);

struct IterationRecord {
  int iter = 0;
  std::size_t nbt = 0;
  std::size_t nv = 0;
  double effective_target = 0.0;
  double alpha = 0.0;
  double error_lp = 0.0;
  double grad_error_lp = 0.0;
  /// Coefficient of variation of the per-element estimated error.
  double cv_equidistribution = 0.0;
  double q_mean = 0.0;
  double q_min = 0.0;
  double out_of_range_fraction = 0.0;
  int sweeps = 0;
};

struct AdaptReport {
  std::vector<IterationRecord> history;
  TriMesh final_mesh;
  /// Metric the final mesh was adapted to, interpolated to its vertices.
  MetricField final_metric;
  double wall_seconds = 0.0;
};

/// Failure inside the loop, tagged with the 1-based iteration.
class AdaptError : public std::runtime_error {
 public:
  AdaptError(int iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

AdaptReport run_adaptation(const AdaptOptions& options, const IterationCallback& on_iteration = {});

/// Coefficient of variation (population std / mean) of the per-element error
/// estimate matching (m, p): |K|^{2/p-1} l2 for m = 0, the gradient form for m = 1.
double equidistribution_cv(const TriMesh& mesh, std::span<const Sym2> vertex_hessians, int m, double p);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root mean square of the log-space residuals.
  double residual = 0.0;
};

/// Least squares fit of log(y) against log(x). Needs at least two positive points.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct StudyResult {
  SlopeFit fit;
  std::vector<double> targets;
  std::vector<double> nbt;
  /// ||e|| for m = 0, ||grad e|| for m = 1, taken from each final iterate.
  std::vector<double> errors;
  std::vector<AdaptReport> reports;
};

/// Runs one adaptation per target (concurrently, capped by worker_count())
/// and fits the error against the final element count.
/// Throws std::invalid_argument for fewer than three or non-increasing targets.
StudyResult convergence_study(const AdaptOptions& options, const std::vector<double>& targets);

/// Fraction of triangles whose centroid lies within delta of a curve.
double layer_concentration(const TriMesh& mesh, const std::function<double(const Vec2&)>& distance,
                           double delta);

}  // namespace anisomesh
