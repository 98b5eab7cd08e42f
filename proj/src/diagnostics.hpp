#pragma once
// Spectral diagnostics at a computed optimum: extremal eigenvalues of
// Hess F (dense below the capacity limit, shifted Lanczos above it) and the
// a-posteriori conditioning estimate.

#include "energy.hpp"

namespace otdens {

struct SpectrumReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  enum class Method { dense, iterative } method = Method::dense;
  int level = 0;
  double delta = 0.0;
  bool converged = true;  // confidence flag of the iterative estimate
};

SpectrumReport hess_F_extremal_eigs(const EnergyModel& model, const Vec& sigma_star,
                                    int level);

// (16 / Lambda) * max over active components of |dE/dmu_i|. Activity is
// thresholded on mu = sigma^2 since flow iterates never vanish exactly.
double condition_estimate(const EnergyModel& model, const Vec& sigma, double Lambda,
                          double active_toll = 1e-8);

}  // namespace otdens
