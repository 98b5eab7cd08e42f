#pragma once
// Experiment orchestration: builds the benchmark problem at a mesh level,
// runs one of the three algorithms, assembles run records, and drives the
// multi-level convergence study with its output files.

#include <memory>
#include <string>
#include <vector>

#include "io.hpp"

namespace otdens {

enum class DeltaRule { h, h2 };
enum class Algorithm { alg1, alg2, alg3 };

DeltaRule delta_rule_from_string(const std::string& s);
Algorithm algorithm_from_string(const std::string& s);
std::string to_string(DeltaRule r);
std::string to_string(Algorithm a);

struct ProblemSetup {
  TriMesh coarse;
  TriMesh fine;
  RefinementMap rmap;
  std::shared_ptr<const CellStiffnessSet> K;
  RectTransportProblem problem;
  int level = 0;
  DeltaRule rule = DeltaRule::h2;
  double h = 0.0;
  double delta = 0.0;
  std::shared_ptr<const EnergyModel> model;

  static ProblemSetup build(int level, DeltaRule rule, const SolverConfig& scfg = {},
                            int k0 = 8);
};

struct SolveOutcome {
  Vec mu;
  Vec sigma;  // empty for the projected scheme
  FlowTrace trace;
  bool converged = false;
  double energy = 0.0;
  double kkt = 0.0;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;
};

// sigma0 (or mu0) is the Lebesgue density, all ones.
SolveOutcome run_algorithm(const ProblemSetup& setup, Algorithm alg, const FlowConfig& cfg);

RunRecord make_record(const ProblemSetup& setup, Algorithm alg, const FlowConfig& cfg,
                      const SolveOutcome& outcome, bool with_spectrum, bool with_errors);

struct StudySpec {
  std::vector<int> levels{0, 1, 2, 3};
  DeltaRule rule = DeltaRule::h2;
  Algorithm algorithm = Algorithm::alg3;
  FlowConfig flow;
  std::string out_dir;
  bool parallel = true;
  int k0 = 8;

  void validate() const;
};

struct StudyLevelResult {
  int level = 0;
  bool ok = false;
  std::string error;
  RunRecord record;
};

struct StudyResult {
  std::vector<StudyLevelResult> levels;
  double slope_l2_mu = 0.0;
  double slope_w1 = 0.0;
  int failed = 0;
};

// Runs every level, writes per-level trace/field/summary files plus the
// convergence and spectrum tables under spec.out_dir. Per-level failures are
// recorded and the study continues.
StudyResult run_study(const StudySpec& spec);

}  // namespace otdens
