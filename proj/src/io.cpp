#include "anisomesh/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace anisomesh {

namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

void finish(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

/// Line reader that skips blank lines and tracks line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      tokens.clear();
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

double to_double(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw IoError("expected a finite number, found '" + s + "'", line);
  return v;
}

long long to_integer(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw IoError("expected an integer, found '" + s + "'", line);
  return v;
}

void expect_fields(const std::vector<std::string>& tokens, std::size_t n, const char* what, std::size_t line) {
  if (tokens.size() != n)
    throw IoError(std::string(what) + ": expected " + std::to_string(n) + " fields, found " +
                      std::to_string(tokens.size()),
                  line);
}

void expect_header(LineReader& r, const char* magic) {
  std::vector<std::string> tok;
  if (!r.next(tok)) throw IoError(std::string("empty input, expected header '") + magic + " 1'", 1);
  if (tok.size() != 2 || tok[0] != magic) throw IoError(std::string("bad header, expected '") + magic + " 1'", r.line());
  if (tok[1] != "1") throw IoError("unsupported format version '" + tok[1] + "'", r.line());
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string shade(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int gb = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#ff%02x%02x", gb, gb);
  return buf;
}

json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

double p_from_json(const json& j) {
  if (j.is_string()) return parse_p(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

std::string format_double(double v) { return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : g17(v); }

double parse_p(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || std::isnan(v) || !(v > 0.0))
    throw std::invalid_argument("p must be a positive number or 'inf', got '" + text + "'");
  return v;
}

// ---- mesh ------------------------------------------------------------------

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << "tmsh 1\n"
      << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size() << '\n';
  for (const Vec2& p : mesh.vertices()) out << g17(p.x) << ' ' << g17(p.y) << '\n';
  for (const Triangle& t : mesh.triangles()) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  for (const BoundaryEdge& e : mesh.boundary_edges()) out << e.v[0] + 1 << ' ' << e.v[1] + 1 << ' ' << e.tag << '\n';
}

void write_mesh(const std::string& path, const TriMesh& mesh) {
  auto out = open_out(path);
  write_mesh(out, mesh);
  finish(out, path);
}

TriMesh read_mesh(std::istream& in) {
  LineReader r(in);
  expect_header(r, "tmsh");
  std::vector<std::string> tok;
  if (!r.next(tok)) throw IoError("missing counts line 'nv nt nbe'", r.line() + 1);
  expect_fields(tok, 3, "counts", r.line());
  const long long nv = to_integer(tok[0], r.line());
  const long long nt = to_integer(tok[1], r.line());
  const long long nbe = to_integer(tok[2], r.line());
  if (nv < 0 || nt < 0 || nbe < 0) throw IoError("counts must be non-negative", r.line());
  if (nv > std::numeric_limits<Index>::max() || nt > std::numeric_limits<Index>::max())
    throw IoError("counts too large", r.line());

  auto truncated = [&](const char* what, long long expected, long long found) {
    return IoError(std::string("unexpected end of file: expected ") + std::to_string(expected) + " " + what +
                       ", found " + std::to_string(found),
                   r.line());
  };
  auto index = [&](const std::string& s) {
    const long long v = to_integer(s, r.line());
    if (v < 1 || v > nv)
      throw IoError("vertex index " + s + " out of range 1.." + std::to_string(nv), r.line());
    return static_cast<Index>(v - 1);
  };

  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!r.next(tok)) throw truncated("vertices", nv, i);
    expect_fields(tok, 2, "vertex", r.line());
    verts.push_back({to_double(tok[0], r.line()), to_double(tok[1], r.line())});
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(nt));
  for (long long i = 0; i < nt; ++i) {
    if (!r.next(tok)) throw truncated("triangles", nt, i);
    expect_fields(tok, 3, "triangle", r.line());
    tris.push_back({index(tok[0]), index(tok[1]), index(tok[2])});
  }
  std::vector<BoundaryEdge> bnd;
  bnd.reserve(static_cast<std::size_t>(nbe));
  for (long long i = 0; i < nbe; ++i) {
    if (!r.next(tok)) throw truncated("boundary edges", nbe, i);
    expect_fields(tok, 3, "boundary edge", r.line());
    const long long tag = to_integer(tok[2], r.line());
    if (tag < std::numeric_limits<int>::min() || tag > std::numeric_limits<int>::max())
      throw IoError("boundary tag out of range", r.line());
    bnd.push_back({{index(tok[0]), index(tok[1])}, static_cast<int>(tag)});
  }
  if (r.next(tok)) throw IoError("trailing data after the declared counts", r.line());
  return build_mesh(std::move(verts), std::move(tris), std::move(bnd));
}

TriMesh read_mesh(const std::string& path) {
  auto in = open_in(path);
  return read_mesh(in);
}

// ---- metric ----------------------------------------------------------------

void write_metric(std::ostream& out, const MetricField& field) {
  out << "tmtr 1\n";
  for (const Sym2& m : field.tensors) out << g17(m.xx) << ' ' << g17(m.xy) << ' ' << g17(m.yy) << '\n';
}

void write_metric(const std::string& path, const MetricField& field) {
  auto out = open_out(path);
  write_metric(out, field);
  finish(out, path);
}

MetricField read_metric(std::istream& in) {
  LineReader r(in);
  expect_header(r, "tmtr");
  MetricField field;
  std::vector<std::string> tok;
  while (r.next(tok)) {
    expect_fields(tok, 3, "metric row", r.line());
    const Sym2 m{to_double(tok[0], r.line()), to_double(tok[1], r.line()), to_double(tok[2], r.line())};
    if (!is_spd(m)) throw MetricFormatError(static_cast<Index>(field.tensors.size()), r.line());
    field.tensors.push_back(m);
  }
  return field;
}

MetricField read_metric(const std::string& path) {
  auto in = open_in(path);
  return read_metric(in);
}

// ---- svg -------------------------------------------------------------------

std::string render_svg(const TriMesh& mesh, const SvgOptions& options) {
  if (mesh.empty()) throw std::invalid_argument("render_svg: empty mesh");
  if (!options.shading.empty() && options.shading.size() != mesh.num_triangles())
    throw std::invalid_argument("render_svg: one shading value per element required");
  const Rect box = mesh.bounding_box();
  const double w = box.width(), h = box.height();
  const double height_px = options.width_px * (w > 0.0 ? h / w : 1.0);
  const double stroke = 0.6 * std::max(w, h) / options.width_px;
  // SVG y grows downward; flip so the plot keeps the usual orientation.
  auto X = [&](double x) { return g17(x); };
  auto Y = [&](double y) { return g17(box.y0 + box.y1 - y); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g17(options.width_px) << "\" height=\""
    << g17(height_px) << "\" viewBox=\"" << g17(box.x0) << ' ' << g17(box.y0) << ' ' << g17(w) << ' ' << g17(h)
    << "\">\n";
  if (!options.shading.empty()) {
    const auto [lo, hi] = std::minmax_element(options.shading.begin(), options.shading.end());
    const double span = *hi - *lo;
    s << "<g stroke=\"none\">\n";
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const Triangle& tr = mesh.triangle(static_cast<Index>(t));
      const double v = span > 0.0 ? (options.shading[t] - *lo) / span : 0.0;
      s << "<polygon points=\"";
      for (int k = 0; k < 3; ++k) {
        const Vec2& p = mesh.vertex(tr[static_cast<std::size_t>(k)]);
        s << (k ? " " : "") << X(p.x) << ',' << Y(p.y);
      }
      s << "\" fill=\"" << shade(v) << "\"/>\n";
    }
    s << "</g>\n";
  }
  s << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << g17(stroke) << "\">\n";
  for (const auto& e : mesh.edges()) {
    const Vec2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]);
    s << "<polyline points=\"" << X(a.x) << ',' << Y(a.y) << ' ' << X(b.x) << ',' << Y(b.y) << "\"/>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void render_svg(const TriMesh& mesh, const std::string& path, const SvgOptions& options) {
  const std::string text = render_svg(mesh, options);
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

// ---- manifest --------------------------------------------------------------

std::string manifest_to_json(const RunManifest& m) {
  const AdaptOptions& o = m.options;
  json j;
  j["format_version"] = m.format_version;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["problem"] = m.problem;
  j["eps"] = m.eps;
  j["m"] = o.m;
  j["p"] = p_to_json(o.p);
  j["variant"] = to_string(o.variant);
  j["target_nbt"] = o.target_elements;
  j["iterations"] = o.iterations;
  j["alpha"] = o.alpha ? json(*o.alpha) : json(nullptr);
  j["hessian_source"] = to_string(o.hessian_source);
  j["epsilon"] = o.epsilon;
  j["feedback_gamma"] = o.feedback_gamma;
  j["initial_divisions"] = o.initial_divisions;
  j["remesh"] = {{"split_threshold", o.remesh.split_threshold},
                 {"collapse_threshold", o.remesh.collapse_threshold},
                 {"max_sweeps", o.remesh.max_sweeps},
                 {"smoothing_passes", o.remesh.smoothing_passes},
                 {"min_quality", o.remesh.min_quality},
                 {"stop_fraction", o.remesh.stop_fraction}};
  j["oracle"] = {{"degree", o.oracle.degree},
                 {"rel_tol", o.oracle.rel_tol},
                 {"max_depth", o.oracle.max_depth},
                 {"sample_divisions", o.oracle.sample_divisions}};
  j["targets"] = m.targets;
  j["out_dir"] = m.out_dir;
  j["files"] = m.files;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
  try {
    RunManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != 1) throw IoError("manifest: unsupported format version " + std::to_string(m.format_version));
    m.command = j.at("command").get<std::string>();
    m.seed = j.value("seed", 0ULL);
    m.problem = j.at("problem").get<std::string>();
    m.eps = j.value("eps", 0.01);
    AdaptOptions& o = m.options;
    o.problem = problem_from_name(m.problem);
    if (o.problem.id == ProblemId::layers) o.problem = layers_problem(m.eps);
    o.m = j.at("m").get<int>();
    o.p = p_from_json(j.at("p"));
    o.variant = monitor_variant_from_name(j.at("variant").get<std::string>());
    o.target_elements = j.at("target_nbt").get<double>();
    o.iterations = j.at("iterations").get<int>();
    if (j.contains("alpha") && !j["alpha"].is_null()) o.alpha = j["alpha"].get<double>();
    o.hessian_source = hessian_source_from_name(j.at("hessian_source").get<std::string>());
    o.epsilon = j.value("epsilon", 0.0);
    o.feedback_gamma = j.value("feedback_gamma", 0.7);
    o.initial_divisions = j.value("initial_divisions", 16);
    if (j.contains("remesh")) {
      const json& r = j["remesh"];
      o.remesh.split_threshold = r.value("split_threshold", o.remesh.split_threshold);
      o.remesh.collapse_threshold = r.value("collapse_threshold", o.remesh.collapse_threshold);
      o.remesh.max_sweeps = r.value("max_sweeps", o.remesh.max_sweeps);
      o.remesh.smoothing_passes = r.value("smoothing_passes", o.remesh.smoothing_passes);
      o.remesh.min_quality = r.value("min_quality", o.remesh.min_quality);
      o.remesh.stop_fraction = r.value("stop_fraction", o.remesh.stop_fraction);
    }
    if (j.contains("oracle")) {
      const json& r = j["oracle"];
      o.oracle.degree = r.value("degree", o.oracle.degree);
      o.oracle.rel_tol = r.value("rel_tol", o.oracle.rel_tol);
      o.oracle.max_depth = r.value("max_depth", o.oracle.max_depth);
      o.oracle.sample_divisions = r.value("sample_divisions", o.oracle.sample_divisions);
    }
    m.targets = j.value("targets", std::vector<double>{});
    m.out_dir = j.value("out_dir", std::string{});
    m.files = j.value("files", std::vector<std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  auto out = open_out(path);
  out << manifest_to_json(manifest);
  finish(out, path);
}

RunManifest read_manifest(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

// ---- csv -------------------------------------------------------------------

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history) {
  auto out = open_out(path);
  out << "iter,nbt,error_lp,grad_error_lp,cv_equidistribution,q_mean\n";
  for (const IterationRecord& r : history)
    out << r.iter << ',' << r.nbt << ',' << g17(r.error_lp) << ',' << g17(r.grad_error_lp) << ','
        << g17(r.cv_equidistribution) << ',' << g17(r.q_mean) << '\n';
  finish(out, path);
}

void write_slopes_csv(const std::string& path, const std::vector<SlopeRow>& rows) {
  auto out = open_out(path);
  out << "p,m,variant,slope,intercept,residual\n";
  for (const SlopeRow& r : rows)
    out << format_double(r.p) << ',' << r.m << ',' << r.variant << ',' << g17(r.fit.slope) << ','
        << g17(r.fit.intercept) << ',' << g17(r.fit.residual) << '\n';
  finish(out, path);
}

}  // namespace anisomesh
