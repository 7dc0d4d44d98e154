// anisomesh: adapt, study, estimate, validate, render.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anisomesh/adapt.hpp"
#include "anisomesh/error_models.hpp"
#include "anisomesh/io.hpp"
#include "anisomesh/validation.hpp"

namespace fs = std::filesystem;
using namespace anisomesh;

namespace {

/// Bad option values detected after parsing; reported as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunFlags {
  std::string problem = "circle";
  double eps = 0.01;
  int m = 0;
  std::string p = "2";
  std::string variant = "new";
  double target = 4000.0;
  int iters = 0;
  double alpha = 0.0;
  std::string hessian = "analytic";
  int divisions = 16;
  std::string manifest;
  std::string out;
  std::string targets;
  unsigned long long seed = 0;
  bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--problem", f.problem, "circle | zigzag | layers | quadratic");
  cmd->add_option("--layer-eps", f.eps, "Layer width parameter of the layers field");
  cmd->add_option("--m", f.m, "0: error in L^p, 1: gradient error in L^p");
  cmd->add_option("--p", f.p, "Norm exponent, a positive number or inf");
  cmd->add_option("--variant", f.variant, "new | huang-russell");
  cmd->add_option("--iters", f.iters, "Iterations (0: problem default)");
  cmd->add_option("--alpha", f.alpha, "Flooring parameter (0: automatic)");
  cmd->add_option("--hessian", f.hessian, "analytic | recovered");
  cmd->add_option("--init-divisions", f.divisions, "Cells per side of the starting mesh");
  cmd->add_option("--seed", f.seed, "Recorded in the manifest");
  cmd->add_option("--manifest", f.manifest, "Reload every run option from a manifest");
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_flag("--quiet", f.quiet, "No progress output");
}

RunManifest manifest_from_flags(const RunFlags& f, const std::string& command) {
  if (!f.manifest.empty()) {
    RunManifest m = read_manifest(f.manifest);
    if (m.command != command)
      throw UsageError("manifest was written by '" + m.command + "', not '" + command + "'");
    m.out_dir = f.out;
    m.files.clear();
    return m;
  }
  RunManifest m;
  m.command = command;
  m.seed = f.seed;
  m.problem = f.problem;
  m.eps = f.eps;
  m.out_dir = f.out;
  AdaptOptions& o = m.options;
  try {
    o.problem = problem_from_name(f.problem);
    if (o.problem.id == ProblemId::layers) o.problem = layers_problem(f.eps);
    o.m = f.m;
    o.p = parse_p(f.p);
    o.variant = monitor_variant_from_name(f.variant);
    o.target_elements = f.target;
    o.iterations = f.iters;
    if (f.alpha != 0.0) o.alpha = f.alpha;
    o.hessian_source = hessian_source_from_name(f.hessian);
    o.initial_divisions = f.divisions;
    validate(o);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return m;
}

void progress(bool quiet, const std::string& label, const IterationRecord& r) {
  if (quiet) return;
  std::fprintf(stderr, "%s iter %2d  nbt %6zu  error %.4e  grad error %.4e  q_mean %.3f\n", label.c_str(), r.iter,
               r.nbt, r.error_lp, r.grad_error_lp, r.q_mean);
}

int cmd_adapt(const RunFlags& f) {
  RunManifest m = manifest_from_flags(f, "adapt");
  fs::create_directories(f.out);
  const AdaptReport rep = run_adaptation(m.options, [&](const IterationRecord& r) { progress(f.quiet, "adapt", r); });

  const fs::path dir(f.out);
  write_mesh((dir / "mesh_final.tmsh").string(), rep.final_mesh);
  write_metric((dir / "metric_final.tmtr").string(), rep.final_metric);
  write_history_csv((dir / "history.csv").string(), rep.history);
  std::vector<double> shade;
  const auto H = hessian_analytic_field(m.options.problem, rep.final_mesh);
  for (std::size_t t = 0; t < rep.final_mesh.num_triangles(); ++t) {
    const auto id = static_cast<Index>(t);
    shade.push_back(std::log10(1e-300 + l2_error_sq(element_geometry(rep.final_mesh, id),
                                                    element_hessian(rep.final_mesh, id, H))));
  }
  render_svg(rep.final_mesh, (dir / "mesh_final.svg").string(), {shade});
  m.files = {"manifest.json", "mesh_final.tmsh", "metric_final.tmtr", "history.csv", "mesh_final.svg"};
  write_manifest((dir / "manifest.json").string(), m);
  if (!f.quiet) std::fprintf(stderr, "wrote %s (%.1f s)\n", f.out.c_str(), rep.wall_seconds);
  return 0;
}

std::vector<double> parse_targets(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw UsageError("bad target '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_study(const RunFlags& f) {
  RunManifest m = manifest_from_flags(f, "study");
  if (f.manifest.empty()) m.targets = parse_targets(f.targets);
  if (m.targets.size() < 3) throw UsageError("study needs at least three targets");
  for (std::size_t i = 1; i < m.targets.size(); ++i)
    if (!(m.targets[i] > m.targets[i - 1])) throw UsageError("study targets must be increasing");
  for (double t : m.targets)
    if (!(t >= 10.0)) throw UsageError("targets must be at least 10");
  fs::create_directories(f.out);
  const fs::path dir(f.out);

  const StudyResult s = convergence_study(m.options, m.targets);
  m.files = {"manifest.json", "slopes.csv"};
  for (std::size_t i = 0; i < s.targets.size(); ++i) {
    const std::string tag = std::to_string(static_cast<long long>(std::llround(s.targets[i])));
    write_history_csv((dir / ("history_" + tag + ".csv")).string(), s.reports[i].history);
    write_mesh((dir / ("mesh_" + tag + ".tmsh")).string(), s.reports[i].final_mesh);
    m.files.push_back("history_" + tag + ".csv");
    m.files.push_back("mesh_" + tag + ".tmsh");
    if (!f.quiet)
      std::fprintf(stderr, "target %s  nbt %.0f  error %.4e\n", tag.c_str(), s.nbt[i], s.errors[i]);
  }
  write_slopes_csv((dir / "slopes.csv").string(), {{m.options.p, m.options.m, to_string(m.options.variant), s.fit}});
  write_manifest((dir / "manifest.json").string(), m);
  if (!f.quiet) std::fprintf(stderr, "slope %.4f  intercept %.4f  residual %.4f\n", s.fit.slope, s.fit.intercept, s.fit.residual);
  return 0;
}

struct EstimateFlags {
  std::string problem = "circle";
  std::string mesh;
  int divisions = 16;
  int m = 0;
  std::string p = "2";
  std::string out;
};

int cmd_estimate(const EstimateFlags& f) {
  ProblemDef prob;
  double p = 0.0;
  try {
    prob = problem_from_name(f.problem);
    p = parse_p(f.p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (f.m != 0 && f.m != 1) throw UsageError("m must be 0 or 1");
  const TriMesh mesh = f.mesh.empty() ? structured_rect_mesh(prob.domain, f.divisions, f.divisions) : read_mesh(f.mesh);
  const auto H = hessian_analytic_field(prob, mesh);
  const ErrorBreakdown oracle = f.m == 0 ? interp_error_lp(mesh, prob, p) : interp_grad_error_lp(mesh, prob, p);

  fs::create_directories(f.out);
  const fs::path path = fs::path(f.out) / "estimate.csv";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "element,area,estimate,oracle\n";
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto id = static_cast<Index>(t);
    const ElementGeometry g = element_geometry(mesh, id);
    const Sym2 Hk = element_hessian(mesh, id, H);
    const double est = f.m == 0 ? lp_error_estimate(g, Hk, p) : w1p_error_estimate(g, Hk, p);
    // squared element norm, matching the estimate
    const double v = oracle.per_element[t];
    const double sq = std::isinf(p) ? v * v : std::pow(v, 2.0 / p);
    out << t + 1 << ',' << format_double(g.area) << ',' << format_double(est) << ',' << format_double(sq) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  std::fprintf(stderr, "global oracle %s\n", format_double(oracle.global).c_str());
  return 0;
}

int cmd_validate(std::size_t cases, unsigned long long seed, const std::string& out_dir) {
  const std::vector<SuiteResult> results{formula_arbitration(cases, seed), linf_arbitration(cases / 2, seed + 1),
                                         lemma_bounds(std::max<std::size_t>(1, cases / 5), seed + 2, default_lemma_ps())};
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "validate.csv";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "suite,cases,failures,worst\n";
  bool ok = true;
  for (const SuiteResult& r : results) {
    out << r.name << ',' << r.cases << ',' << r.failures << ',' << format_double(r.worst) << '\n';
    std::fprintf(stderr, "%-20s %s  cases %zu  failures %zu  worst %.3e\n", r.name.c_str(),
                 r.passed() ? "PASS" : "FAIL", r.cases, r.failures, r.worst);
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

int cmd_render(const std::string& mesh_path, const std::string& out, const std::string& shade_problem) {
  const TriMesh mesh = read_mesh(mesh_path);
  SvgOptions opt;
  if (!shade_problem.empty()) {
    ProblemDef prob;
    try {
      prob = problem_from_name(shade_problem);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto H = hessian_analytic_field(prob, mesh);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto id = static_cast<Index>(t);
      opt.shading.push_back(
          std::log10(1e-300 + l2_error_sq(element_geometry(mesh, id), element_hessian(mesh, id, H))));
    }
  }
  render_svg(mesh, out, opt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic mesh adaptation driven by element-wise interpolation error"};
  app.require_subcommand(1);

  RunFlags adapt_flags;
  auto* adapt = app.add_subcommand("adapt", "Run one adaptation");
  add_run_flags(adapt, adapt_flags);
  adapt->add_option("--target-nbt", adapt_flags.target, "Target element count");

  RunFlags study_flags;
  auto* study = app.add_subcommand("study", "Convergence study over several targets");
  add_run_flags(study, study_flags);
  study->add_option("--targets", study_flags.targets, "Comma separated increasing targets");

  EstimateFlags est;
  auto* estimate = app.add_subcommand("estimate", "Per-element estimates against the oracle");
  estimate->add_option("--problem", est.problem);
  estimate->add_option("--mesh", est.mesh, "Mesh file (default: structured mesh of the domain)");
  estimate->add_option("--divisions", est.divisions);
  estimate->add_option("--m", est.m);
  estimate->add_option("--p", est.p);
  estimate->add_option("--out", est.out)->required();

  std::size_t cases = 1000;
  unsigned long long seed = 1;
  std::string validate_out;
  auto* validate_cmd = app.add_subcommand("validate", "Formula arbitration and norm-equivalence suites");
  validate_cmd->add_option("--cases", cases);
  validate_cmd->add_option("--seed", seed);
  validate_cmd->add_option("--out", validate_out)->required();

  std::string render_mesh, render_out, render_shade;
  auto* render = app.add_subcommand("render", "SVG plot of a mesh file");
  render->add_option("--mesh", render_mesh)->required();
  render->add_option("--out", render_out)->required();
  render->add_option("--shade-problem", render_shade, "Shade elements by estimated error for this field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (study_flags.manifest.empty() && study->parsed() && study_flags.targets.empty())
      throw UsageError("study needs --targets or --manifest");
    if (adapt->parsed()) return cmd_adapt(adapt_flags);
    if (study->parsed()) return cmd_study(study_flags);
    if (estimate->parsed()) return cmd_estimate(est);
    if (validate_cmd->parsed()) return cmd_validate(cases, seed, validate_out);
    if (render->parsed()) return cmd_render(render_mesh, render_out, render_shade);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
