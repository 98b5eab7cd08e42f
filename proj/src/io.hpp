#pragma once
// Deterministic serialization: trace CSV, legacy-VTK cell fields, the
// convergence table with fitted slopes, and a key=value run summary. Floats
// are written as shortest round-trip decimals so identical runs produce
// byte-identical files.

#include <optional>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "flow.hpp"
#include "mesh.hpp"
#include "problems.hpp"

namespace otdens {

struct RunRecord {
  // config snapshot
  std::string algorithm;
  std::string delta_rule;
  int level = 0;
  double delta = 0.0;
  double h = 0.0;
  FlowConfig flow;
  std::string config_hash;  // content hash of the snapshot above

  std::vector<TraceRow> rows;
  bool converged = false;

  // final diagnostics
  double kkt = 0.0;
  double grad_norm = 0.0;
  double energy = 0.0;
  std::optional<SpectrumReport> spectrum;
  std::optional<ErrorReport> errors;
  double wall_seconds = 0.0;
};

// Canonical snapshot string and its hash; stable under re-serialization.
std::string config_snapshot(const RunRecord& rec);
std::string sha1_hex(const std::string& data);

std::string format_double(double v);

void write_trace_csv(const RunRecord& rec, const std::string& path);

// Legacy ASCII unstructured grid with one CELL_DATA scalar "mu"; refuses
// negative entries.
void write_field_vtk(const TriMesh& mesh, const Vec& mu, const std::string& path);

struct LevelErrorRecord {
  int level = 0;
  double h = 0.0;
  double l2_mu_error = 0.0;
  double w1_error = 0.0;
};

// CSV `level,h,l2_mu_error,w1_error` plus fitted log-log slopes appended as
// comment lines; requires at least two levels.
void write_convergence_table(const std::vector<LevelErrorRecord>& records,
                             const std::string& path);

struct SpectrumRecord {
  int level = 0;
  double h = 0.0;
  SpectrumReport report;
};

void write_spectrum_table(const std::vector<SpectrumRecord>& records,
                          const std::string& path);

void write_run_summary(const RunRecord& rec, const std::string& path);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace otdens
