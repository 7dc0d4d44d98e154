#pragma once

// Text formats for meshes ("tmsh 1") and vertex metrics ("tmtr 1"), SVG mesh
// plots, run manifests and CSV reports.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisomesh/adapt.hpp"
#include "anisomesh/mesh.hpp"
#include "anisomesh/metric.hpp"

namespace anisomesh {

/// Parse or file error. line() is the 1-based input line, 0 when not tied to one.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Metric row that is not SPD; vertex() is 0-based.
class MetricFormatError : public IoError {
 public:
  MetricFormatError(Index vertex, std::size_t line)
      : IoError("vertex " + std::to_string(vertex + 1) + ": metric is not symmetric positive definite", line),
        vertex_(vertex) {}
  Index vertex() const noexcept { return vertex_; }

 private:
  Index vertex_;
};

void write_mesh(std::ostream& out, const TriMesh& mesh);
void write_mesh(const std::string& path, const TriMesh& mesh);
/// Mesh invariant violations surface as MeshError, syntax errors as IoError.
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh(const std::string& path);

/// Writes the normalized tensors only.
void write_metric(std::ostream& out, const MetricField& field);
void write_metric(const std::string& path, const MetricField& field);
/// Returns a field with theta = 1 holding the stored tensors.
MetricField read_metric(std::istream& in);
MetricField read_metric(const std::string& path);

struct SvgOptions {
  /// Optional per-element scalar; elements are filled on a white-to-red ramp.
  std::vector<double> shading;
  double width_px = 800.0;
};

std::string render_svg(const TriMesh& mesh, const SvgOptions& options = {});
void render_svg(const TriMesh& mesh, const std::string& path, const SvgOptions& options = {});

struct RunManifest {
  int format_version = 1;
  std::string command = "adapt";
  /// The pipeline is deterministic; the seed is recorded for completeness.
  unsigned long long seed = 0;
  std::string problem = "circle";
  double eps = 0.01;
  AdaptOptions options;
  std::vector<double> targets;
  std::string out_dir;
  std::vector<std::string> files;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

/// Header: iter,nbt,error_lp,grad_error_lp,cv_equidistribution,q_mean
void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history);

struct SlopeRow {
  double p = 2.0;
  int m = 0;
  std::string variant = "new";
  SlopeFit fit;
};

/// Header: p,m,variant,slope,intercept,residual
void write_slopes_csv(const std::string& path, const std::vector<SlopeRow>& rows);

/// "inf" for infinity, otherwise 17 significant digits.
std::string format_double(double v);
/// Accepts "inf", "infinity" and ordinary numbers.
double parse_p(const std::string& text);

}  // namespace anisomesh
