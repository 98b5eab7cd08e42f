#pragma once
// The rectangle-to-rectangle rigid transport benchmark: unit density moved
// from [1/8,3/8]x[1/4,3/4] to [5/8,7/8]x[1/4,3/4], with the known optimal
// density, exact per-cell averages, the exact Wasserstein-1 value, and error
// norms against them.

#include <functional>

#include "energy.hpp"
#include "fem.hpp"

namespace otdens {

struct RectTransportProblem {
  Rect plus;
  Rect minus;
  double density = 1.0;

  static RectTransportProblem benchmark_default();
  void validate() const;  // equal areas, inside the unit square, disjoint
  bool is_translate() const;
};

// Exact optimal density of the default problem, pointwise.
double exact_mu_star(double x, double y);

struct ExactSolution {
  std::function<double(double, double)> mu_star;
  double w1 = 0.0;
};

ExactSolution exact_solution();

// W1(f+, f-) for a rigid translation: mass times displacement.
double exact_w1(const RectTransportProblem& problem);
double exact_w1();  // the default problem, 1/16

// Per-coarse-triangle averages of the exact density; requires the mesh to be
// aligned with the support bands (divisions a multiple of 8).
Vec exact_mu_cell_averages(const TriMesh& coarse);

struct ErrorReport {
  double l2_mu_error = 0.0;  // area-weighted L2 against exact cell averages
  double w1_error = 0.0;     // |E - E(mu*)| with E(mu*) = 2 W1 (dual + mass)
};

ErrorReport error_report(const Vec& mu, double energy_value, const TriMesh& coarse);

// Optimal value of the transport energy for the default problem. Both the
// dual term and the mass contribute W1 each, so this equals 2 * exact_w1().
double exact_energy_optimum();

}  // namespace otdens
