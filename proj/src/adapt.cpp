#include "anisomesh/adapt.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anisomesh/error_models.hpp"
#include "anisomesh/hessian_recovery.hpp"
#include "anisomesh/parallel.hpp"

namespace anisomesh {

namespace {

std::vector<Sym2> vertex_hessians(const AdaptOptions& o, const TriMesh& mesh) {
  if (o.hessian_source == HessianSource::analytic) return hessian_analytic_field(o.problem, mesh);
  const std::vector<double> values = sample_values(o.problem, mesh);
  return recover_hessian(mesh, values);
}

}  // namespace

const char* to_string(HessianSource s) { return s == HessianSource::analytic ? "analytic" : "recovered"; }

HessianSource hessian_source_from_name(const std::string& name) {
  if (name == "analytic") return HessianSource::analytic;
  if (name == "recovered") return HessianSource::recovered;
  throw std::invalid_argument("unknown hessian source '" + name + "'");
}

int default_iterations(ProblemId problem, int m, double p) {
  switch (problem) {
    case ProblemId::zigzag:
      return 20;
    case ProblemId::layers:
      return (m == 1 && std::isinf(p)) ? 30 : 20;
    default:
      return 15;
  }
}

void validate(const AdaptOptions& o) {
  if (o.m != 0 && o.m != 1) throw std::invalid_argument("m must be 0 or 1");
  require_valid_p(o.p);
  if (!(o.target_elements >= 10.0)) throw std::invalid_argument("target element count must be at least 10");
  if (o.iterations < 0) throw std::invalid_argument("iterations must be at least 1");
  if (o.alpha && !(*o.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (o.initial_divisions < 1) throw std::invalid_argument("initial_divisions must be positive");
  if (!(o.feedback_gamma >= 0.0)) throw std::invalid_argument("feedback_gamma must be non-negative");
  validate(o.remesh);
}

double equidistribution_cv(const TriMesh& mesh, std::span<const Sym2> hessians, int m, double p) {
  const std::size_t n = mesh.num_triangles();
  if (n == 0) return 0.0;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto id = static_cast<Index>(t);
    const ElementGeometry g = element_geometry(mesh, id);
    const Sym2 H = element_hessian(mesh, id, hessians);
    const double e = m == 0 ? lp_error_estimate(g, H, p) : w1p_error_estimate(g, H, p);
    sum += e;
    sum_sq += e * e;
  }
  const double mean = sum / static_cast<double>(n);
  if (!(mean > 0.0)) return 0.0;
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
  return std::sqrt(var) / mean;
}

AdaptReport run_adaptation(const AdaptOptions& options, const IterationCallback& on_iteration) {
  validate(options);
  const auto start = std::chrono::steady_clock::now();
  const int iterations =
      options.iterations > 0 ? options.iterations : default_iterations(options.problem.id, options.m, options.p);

  AdaptReport report;
  TriMesh mesh = structured_rect_mesh(options.problem.domain, options.initial_divisions, options.initial_divisions);
  std::vector<Sym2> hessians;
  std::size_t prev_nbt = 0;
  const double nt = options.target_elements;

  for (int it = 1; it <= iterations; ++it) {
    try {
      if (hessians.empty()) hessians = vertex_hessians(options, mesh);
      IterationRecord rec;
      rec.iter = it;
      rec.effective_target =
          it == 1 ? nt : nt * std::pow(nt / static_cast<double>(prev_nbt), options.feedback_gamma);

      BuildMetricOptions bm;
      bm.m = options.m;
      bm.p = options.p;
      bm.variant = options.variant;
      bm.alpha = options.alpha;
      bm.target_elements = rec.effective_target;
      const MetricField field = build_metric(mesh, hessians, bm);
      rec.alpha = field.descriptor.alpha;
      RemeshResult rr = adapt_mesh(mesh, field, options.remesh);
      mesh = std::move(rr.mesh);
      hessians = vertex_hessians(options, mesh);

      rec.nbt = mesh.num_triangles();
      rec.nv = mesh.num_vertices();
      rec.q_mean = rr.report.q_mean;
      rec.q_min = rr.report.q_min;
      rec.out_of_range_fraction = rr.report.out_of_range_fraction;
      rec.sweeps = rr.report.operations.sweeps;
      rec.cv_equidistribution = equidistribution_cv(mesh, hessians, options.m, options.p);
      if (options.measure_every_iteration || it == iterations) {
        rec.error_lp = interp_error_lp(mesh, options.problem, options.p, options.oracle).global;
        rec.grad_error_lp = interp_grad_error_lp(mesh, options.problem, options.p, options.oracle).global;
      } else {
        rec.error_lp = rec.grad_error_lp = std::numeric_limits<double>::quiet_NaN();
      }
      if (rec.nbt == 0) throw std::runtime_error("remesher returned an empty mesh");
      prev_nbt = rec.nbt;
      report.history.push_back(rec);
      if (it == iterations) report.final_metric = std::move(rr.metric);
      if (on_iteration) on_iteration(rec);
    } catch (const AdaptError&) {
      throw;
    } catch (const std::exception& e) {
      throw AdaptError(it, e.what());
    }
  }
  report.final_mesh = std::move(mesh);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog needs matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog needs positive samples");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw std::invalid_argument("fit_loglog needs distinct abscissae");
  SlopeFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

StudyResult convergence_study(const AdaptOptions& options, const std::vector<double>& targets) {
  if (targets.size() < 3) throw std::invalid_argument("convergence study needs at least three targets");
  for (std::size_t i = 1; i < targets.size(); ++i)
    if (!(targets[i] > targets[i - 1])) throw std::invalid_argument("study targets must be increasing");
  validate(options);

  StudyResult s;
  s.targets = targets;
  s.reports.resize(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    AdaptOptions o = options;
    o.target_elements = targets[i];
    s.reports[i] = run_adaptation(o);
  });
  for (const AdaptReport& r : s.reports) {
    const IterationRecord& last = r.history.back();
    s.nbt.push_back(static_cast<double>(last.nbt));
    s.errors.push_back(options.m == 0 ? last.error_lp : last.grad_error_lp);
  }
  s.fit = fit_loglog(s.nbt, s.errors);
  return s;
}

double layer_concentration(const TriMesh& mesh, const std::function<double(const Vec2&)>& distance,
                           double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("layer_concentration: delta must be positive");
  if (mesh.empty()) return 0.0;
  std::size_t near = 0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    if (distance(mesh.centroid(static_cast<Index>(t))) <= delta) ++near;
  return static_cast<double>(near) / static_cast<double>(mesh.num_triangles());
}

}  // namespace anisomesh
