// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <CLI11.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "anisomesh/adapt.hpp"
#include "anisomesh/error_models.hpp"
#include "anisomesh/exact_norms.hpp"
#include "anisomesh/hessian_recovery.hpp"
#include "anisomesh/io.hpp"
#include "anisomesh/metric.hpp"
#include "anisomesh/remesher.hpp"
#include "anisomesh/validation.hpp"

using namespace anisomesh;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) {
  std::printf("  %s\n", s.c_str());
  std::fflush(stdout);
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

TriMesh single_triangle(const std::array<Vec2, 3>& t) {
  return build_mesh({t[0], t[1], t[2]}, {{0, 1, 2}}, {{{0, 1}, 1}, {{1, 2}, 1}, {{2, 0}, 1}});
}

TriMesh jittered(const Rect& d, int n, std::mt19937_64& rng) {
  const TriMesh base = structured_rect_mesh(d, n, n);
  std::uniform_real_distribution<double> j(-0.3, 0.3);
  std::vector<Vec2> v(base.vertices().begin(), base.vertices().end());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (base.vertex_class(static_cast<Index>(i)).kind == VertexKind::interior)
      v[i] += Vec2{j(rng) * d.width() / n, j(rng) * d.height() / n};
  return build_mesh(v, {base.triangles().begin(), base.triangles().end()},
                    {base.boundary_edges().begin(), base.boundary_edges().end()});
}

Sym2 random_spd(std::mt19937_64& rng, double max_cond) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l1 = std::exp(6.0 * u(rng) - 3.0);
  const double l2 = l1 * std::exp(std::log(max_cond) * u(rng));
  return rotate(Sym2::diag(l1, l2), 2.0 * std::numbers::pi * u(rng));
}

double sym_diff(const Sym2& a, const Sym2& b) { return max_abs_entry(a - b) / std::max(1e-300, max_abs_entry(b)); }

// ---------------------------------------------------------------------------

Outcome formula_arbitration_check() {
  Timer t;
  Outcome o;
  const TriMesh k = single_triangle({Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}});
  const Rect box{-1, 2, -1, 2};
  struct Pin {
    const char* name;
    Sym2 A;  // u = x^T A x
    bool grad;
    double expect;
  };
  const Pin pins[] = {{"L2 x^2+y^2", Sym2::identity(), false, 11.0 / 180}, {"L2 x^2", Sym2::diag(1, 0), false, 1.0 / 60},
                      {"L2 xy", Sym2{0, 0.5, 0}, false, 1.0 / 180},       {"H1 x^2", Sym2::diag(1, 0), true, 1.0 / 6},
                      {"H1 x^2+y^2", Sym2::identity(), true, 1.0 / 3}};
  const ElementGeometry g = element_geometry(k, 0);
  for (const Pin& p : pins) {
    const ProblemDef u = quadratic_problem(p.A, {}, 0.0, box);
    const double oracle = std::pow((p.grad ? interp_grad_error_lp(k, u, 2.0) : interp_error_lp(k, u, 2.0)).global, 2);
    const double formula = p.grad ? h1_error_sq(g, 2.0 * p.A) : l2_error_sq(g, 2.0 * p.A);
    const bool ok = rel_close(oracle, p.expect, 1e-12) && rel_close(formula, p.expect, 1e-12);
    note(fmt("pinned %-11s expect %.10f oracle %.10f formula %.10f %s", p.name, p.expect, oracle, formula, ok ? "ok" : "MISMATCH"));
    o.pass &= ok;
  }
  const SuiteResult r = formula_arbitration(1000, 20241);
  o.pass &= r.passed() && r.cases == 1000;
  const double secs = t.seconds();
  o.pass &= secs < 10.0;
  o.detail = fmt("%zu cases, %zu failures, worst rel diff %.2e, %.2f s (limit 10 s)", r.cases, r.failures, r.worst, secs);
  return o;
}

Outcome linf_check() {
  Timer t;
  const SuiteResult r = linf_arbitration(500, 20242);
  const double secs = t.seconds();
  return {r.passed() && secs < 5.0,
          fmt("%zu cases (acute + right), %zu failures, worst rel diff %.2e, %.2f s (limit 5 s)", r.cases, r.failures, r.worst, secs)};
}

Outcome lemma_check() {
  Timer t;
  const SuiteResult r = lemma_bounds(200, 20243, default_lemma_ps());
  std::mt19937_64 rng(20244);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t vec_fail = 0, vec_cases = 0;
  for (int d : {2, 3, 5})
    for (double p : {0.5, 1.0, 3.0, 10.0}) {
      const auto c = vector_equiv_constants(p, d);
      for (int k = 0; k < 200; ++k) {
        double s2 = 0.0, sp = 0.0;
        for (int i = 0; i < d; ++i) {
          const double v = std::exp(8.0 * u(rng) - 4.0);
          s2 += v * v;
          sp += std::pow(v, p);
        }
        const double n2 = std::sqrt(s2), np = std::pow(sp, 1.0 / p);
        ++vec_cases;
        if (c[0] * n2 > np * (1 + 1e-12) || np > c[1] * n2 * (1 + 1e-12)) ++vec_fail;
      }
    }
  const double secs = t.seconds();
  return {r.passed() && vec_fail == 0 && secs < 10.0,
          fmt("polynomial/sandwich %zu cases %zu violations (worst %.3f); vector bounds %zu cases %zu violations; %.2f s (limit 10 s)",
              r.cases, r.failures, r.worst, vec_cases, vec_fail, secs)};
}

Outcome metric_algebra_check() {
  Timer t;
  std::mt19937_64 rng(20245);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 1000;
  std::size_t rot = 0, scale = 0, cont = 0, spd = 0, hr = 0, align = 0;
  for (int k = 0; k < n; ++k) {
    // 1e-12 equivariance is only meaningful above the rounding floor cond * eps;
    // the SPD closure check below uses the full 1e6 range.
    const Sym2 h = random_spd(rng, 1e4);
    const Sym2 stiff = random_spd(rng, 1e6);
    const double a = 2.0 * std::numbers::pi * u(rng);
    const int m = k % 2;
    const double p = std::array<double, 4>{1.0, 2.0, 4.0, kInfinity}[static_cast<std::size_t>(k % 4)];
    if (sym_diff(monitor(rotate(h, a), m, p), rotate(monitor(h, m, p), a)) > 1e-12) ++rot;
    const double c = k % 3 ? 2.0 : 10.0;
    const double pf = std::array<double, 3>{1.0, 2.0, 4.0}[static_cast<std::size_t>(k % 3)];
    const double e0 = pf / (pf + 1), e1 = -2.0 / (pf + 2) + pf / (pf + 2) + 1.0;
    if (sym_diff(monitor(c * h, 0, pf), std::pow(c, e0) * monitor(h, 0, pf)) > 1e-12 ||
        sym_diff(monitor(c * h, 1, pf), std::pow(c, e1) * monitor(h, 1, pf)) > 1e-12)
      ++scale;
    if (sym_diff(monitor(h, m, 1e6), monitor(h, m, kInfinity)) > 1e-4) ++cont;
    const Sym2 other = random_spd(rng, 1e6);
    if (!is_spd(monitor(stiff, m, p)) || !is_spd(monitor_hr(stiff, m, p)) ||
        !is_spd(metric_interpolate(stiff, other, u(rng))) || !is_spd(regularize_hessian(stiff - other, 1e-3)))
      ++spd;
    if (!(monitor_hr(h, 0, p) == monitor(h, 0, p)) && sym_diff(monitor_hr(h, 0, p), monitor(h, 0, p)) > 1e-13) ++hr;
    // output shares the eigenvectors of the input
    const SymEigen ei = eigen(h), eo = eigen(monitor(h, m, p));
    if (std::abs(std::abs(dot(ei.v1, eo.v1)) - 1.0) > 1e-10) ++align;
  }
  const double secs = t.seconds();
  const bool ok = rot + scale + cont + spd + hr + align == 0 && secs < 5.0;
  return {ok, fmt("%d tensor draws (cond <= 1e4 equivariance/scaling, <= 1e6 SPD): rotation %zu, scaling %zu, p->inf %zu, SPD %zu, m=0 variants %zu, alignment %zu "
                  "failures; %.2f s (limit 5 s)",
                  n, rot, scale, cont, spd, hr, align, secs)};
}

Outcome normalization_check() {
  Timer t;
  Outcome o;
  double worst = 0.0;
  for (const ProblemDef& prob : {circle_problem(), zigzag_problem(), layers_problem()}) {
    const TriMesh mesh = structured_rect_mesh(prob.domain, 32, 32);
    const std::vector<Sym2> h = hessian_analytic_field(prob, mesh);
    for (int m : {0, 1})
      for (double p : {1.0, 2.0, 4.0, kInfinity})
        for (double n : {1000.0, 8000.0}) {
          BuildMetricOptions b;
          b.m = m;
          b.p = p;
          b.target_elements = n;
          const MetricField f = build_metric(mesh, h, b);
          double vol = 0.0;
          for (std::size_t k = 0; k < mesh.num_triangles(); ++k) vol += metric_volume(mesh, f, static_cast<Index>(k));
          const double rel = std::abs(vol - kUnitTriangleArea * n) / (kUnitTriangleArea * n);
          worst = std::max(worst, rel);
        }
  }
  const double secs = t.seconds();
  o.pass = worst <= 1e-3 && secs < 5.0;
  o.detail = fmt("48 fields on the three example domains, worst relative volume error %.2e; %.2f s (limit 5 s)", worst, secs);
  return o;
}

Outcome remesher_check() {
  Timer t;
  const TriMesh square = structured_rect_mesh({0, 1, 0, 1}, 1, 1);
  const MetricField f = constant_metric(square, Sym2::identity(800));
  const RemeshResult a = adapt_mesh(square, f);
  const RemeshResult b = adapt_mesh(square, f);
  const double predicted = 800.0 / kUnitTriangleArea;
  const double n = static_cast<double>(a.mesh.num_triangles());
  std::size_t in = 0;
  for (const auto& e : a.mesh.edges()) {
    const double l = metric_edge_length(a.mesh, a.metric, e[0], e[1]);
    in += l >= 1.0 / std::numbers::sqrt2 && l <= std::numbers::sqrt2;
  }
  const double frac = static_cast<double>(in) / static_cast<double>(a.mesh.edges().size());
  bool invariants = true;
  try {
    const TriMesh rebuilt = build_mesh({a.mesh.vertices().begin(), a.mesh.vertices().end()},
                                       {a.mesh.triangles().begin(), a.mesh.triangles().end()},
                                       {a.mesh.boundary_edges().begin(), a.mesh.boundary_edges().end()});
    invariants = rebuilt == a.mesh && std::abs(a.mesh.total_area() - 1.0) < 1e-10;
  } catch (const std::exception& e) {
    note(std::string("invariant violation: ") + e.what());
    invariants = false;
  }
  const bool deterministic = a.mesh == b.mesh;
  const double secs = t.seconds();
  const bool ok = frac >= 0.95 && std::abs(n - predicted) <= 0.4 * predicted && invariants && deterministic && secs < 30.0;
  return {ok, fmt("%zu triangles (prediction %.0f, ratio %.3f), %.1f%% edges in [1/sqrt2, sqrt2], q_mean %.3f, invariants %s, "
                  "deterministic %s; %.2f s (limit 30 s)",
                  a.mesh.num_triangles(), predicted, n / predicted, 100.0 * frac, a.report.q_mean,
                  invariants ? "ok" : "FAIL", deterministic ? "yes" : "NO", secs)};
}

const std::vector<double> kTargets{1000, 2000, 4000, 8000, 16000};

Outcome rates_check(const std::string& problem) {
  Timer t;
  Outcome o;
  std::size_t ok_count = 0, total = 0;
  for (int m : {0, 1})
    for (double p : {1.0, 2.0, 4.0, kInfinity}) {
      AdaptOptions a;
      a.problem = problem_from_name(problem);
      a.m = m;
      a.p = p;
      a.measure_every_iteration = false;
      Timer st;
      const StudyResult s = convergence_study(a, kTargets);
      const double lo = m == 0 ? -1.15 : -0.6;
      const double hi = m == 0 ? -0.85 : -0.4;
      const bool ok = s.fit.slope >= lo && s.fit.slope <= hi;
      std::ostringstream pts;
      for (std::size_t i = 0; i < s.nbt.size(); ++i) pts << ' ' << s.nbt[i] << ':' << fmt("%.3e", s.errors[i]);
      note(fmt("%s m=%d p=%-3s iters=%d slope %.3f in [%.2f, %.2f] %s (resid %.3f, %.0f s) |%s", problem.c_str(), m,
               format_double(p).c_str(), default_iterations(a.problem.id, m, p), s.fit.slope, lo, hi, ok ? "ok" : "OUT",
               s.fit.residual, st.seconds(), pts.str().c_str()));
      ok_count += ok;
      ++total;
    }
  o.pass = ok_count == total;
  o.detail = fmt("[%s] %zu/%zu slopes in bracket; %.0f s", problem.c_str(), ok_count, total, t.seconds());
  return o;
}

Outcome layer_check() {
  Timer t;
  const ProblemDef prob = layers_problem();
  AdaptOptions a;
  a.problem = prob;
  a.m = 1;
  a.p = 2.0;
  a.target_elements = 8000;
  a.iterations = 15;
  a.measure_every_iteration = false;
  const auto dist = [&](const Vec2& x) { return feature_distance(prob, x); };
  const double delta = 0.02;
  const AdaptReport r = run_adaptation(a);
  const TriMesh uniform = structured_rect_mesh(prob.domain, 63, 63);
  const double base = layer_concentration(uniform, dist, delta);
  const double adapted = layer_concentration(r.final_mesh, dist, delta);
  const double secs = t.seconds();
  return {adapted >= 3.0 * base && secs < 300.0,
          fmt("nbt %zu: fraction within %.2f of the layers %.3f vs uniform (%zu triangles) %.3f, ratio %.2f (need 3); %.0f s (limit "
              "300 s)",
              r.final_mesh.num_triangles(), delta, adapted, uniform.num_triangles(), base, adapted / base, secs)};
}

Outcome recovery_check() {
  Timer t;
  std::mt19937_64 rng(20246);
  std::uniform_real_distribution<double> u(-5, 5);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const TriMesh mesh = k % 2 ? jittered({u(rng), 6.0, u(rng), 6.0}, 6 + k % 5, rng) : structured_rect_mesh({0, 1, 0, 2}, 5, 7);
    const double c[6] = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    std::vector<double> vals;
    for (const Vec2& p : mesh.vertices())
      vals.push_back(c[0] * p.x * p.x + c[1] * p.x * p.y + c[2] * p.y * p.y + c[3] * p.x + c[4] * p.y + c[5]);
    const Sym2 exact{2 * c[0], c[1], 2 * c[2]};
    for (const Sym2& h : recover_hessian(mesh, vals)) worst = std::max(worst, sym_diff(h, exact));
  }
  note(fmt("quadratic reproduction on 20 meshes (all vertices), worst relative error %.2e", worst));

  AdaptOptions a;
  a.problem = circle_problem();
  a.m = 0;
  a.p = 2.0;
  a.hessian_source = HessianSource::recovered;
  a.measure_every_iteration = false;
  const StudyResult s = convergence_study(a, kTargets);
  std::ostringstream pts;
  for (std::size_t i = 0; i < s.nbt.size(); ++i) pts << ' ' << s.nbt[i] << ':' << fmt("%.3e", s.errors[i]);
  note(fmt("recovered-Hessian study circle m=0 p=2: slope %.3f |%s", s.fit.slope, pts.str().c_str()));
  const double secs = t.seconds();
  const bool ok = worst <= 1e-8 && s.fit.slope >= -1.2 && s.fit.slope <= -0.8 && secs < 300.0;
  return {ok, fmt("exactness %.2e (limit 1e-8), slope %.3f in [-1.2, -0.8]; %.0f s (limit 300 s)", worst, s.fit.slope, secs)};
}

Outcome io_check() {
  Timer t;
  std::mt19937_64 rng(20247);
  std::uniform_real_distribution<double> u(-1e4, 1e4), w(0.0, 1.0);
  std::uniform_int_distribution<int> n(1, 9);
  std::size_t fails = 0;
  for (int k = 0; k < 100; ++k) {
    const double x0 = u(rng), y0 = u(rng);
    const TriMesh mesh = jittered({x0, x0 + 1e-3 + 100 * w(rng), y0, y0 + 1e-3 + 100 * w(rng)}, n(rng), rng);
    MetricField f;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) f.tensors.push_back(random_spd(rng, 1e8));
    std::stringstream ms, fs;
    write_mesh(ms, mesh);
    write_metric(fs, f);
    const TriMesh rm = read_mesh(ms);
    const MetricField rf = read_metric(fs);
    bool same = rm == mesh && rf.tensors == f.tensors;
    for (std::size_t i = 0; same && i < mesh.num_vertices(); ++i)
      same = std::bit_cast<std::uint64_t>(rm.vertices()[i].x) == std::bit_cast<std::uint64_t>(mesh.vertices()[i].x) &&
             std::bit_cast<std::uint64_t>(rm.vertices()[i].y) == std::bit_cast<std::uint64_t>(mesh.vertices()[i].y);
    fails += !same;
  }
  const double secs = t.seconds();
  return {fails == 0 && secs < 2.0, fmt("100 mesh + metric instances, %zu mismatches; %.3f s (limit 2 s)", fails, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string only = "1,2,3,4,5,6,7,8,9,10";
  std::string problem;
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--problem", problem, "restrict criterion 7 to one problem (circle, zigzag, layers)");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  {
    std::stringstream ss(only);
    for (std::string tok; std::getline(ss, tok, ',');) selected.insert(std::stoi(tok));
  }
  const std::vector<std::string> problems = problem.empty() ? std::vector<std::string>{"circle", "zigzag", "layers"}
                                                            : std::vector<std::string>{problem};

  const std::map<int, std::function<Outcome()>> checks{
      {1, formula_arbitration_check}, {2, linf_check},     {3, lemma_check}, {4, metric_algebra_check},
      {5, normalization_check},       {6, remesher_check}, {8, layer_check}, {9, recovery_check},
      {10, io_check}};

  bool all = true;
  auto run = [&](int id, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    all &= o.pass;
  };
  for (int id : selected) {
    if (id == 7) {
      for (const std::string& p : problems) run(7, [&] { return rates_check(p); });
    } else if (checks.count(id)) {
      run(id, checks.at(id));
    } else {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
  }
  return all ? 0 : 1;
}
