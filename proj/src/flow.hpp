#pragma once
// Minimization drivers for the discrete transport energy: projected forward
// Euler on E over the nonnegative cone, backward Euler on F with an inner
// Newton solver, and the adaptive variant that grows the time step
// geometrically and restarts on Newton failure.

#include <vector>

#include "energy.hpp"

namespace otdens {

struct FlowConfig {
  double tau0 = 1.0;
  double alpha = 1.2;     // adaptive growth factor, > 1
  double eps = 1e-8;      // Newton stopping constant
  double toll = 1e-9;     // outer stop on the gradient norm
  double kkt_toll = 1e-8; // activity threshold for the reported KKT residual
  long n_step = 100000;
  int r_max = 10;         // Newton iterations per step before failure

  // Inner linear solver: dense factorization of Hess G at or below this
  // dimension, truncated CG on Hessian-vector products above it.
  int newton_dense_limit = 64;
  double cg_tol_cap = 1e-3;
  int cg_max_iter = 400;

  void validate() const;  // throws std::invalid_argument naming the field
};

struct TraceRow {
  long step = 0;
  double tau = 0.0;
  double delta_sigma = 0.0;  // area-weighted L2 of the iterate increment
  double grad_norm = 0.0;    // Euclidean norm of grad F (or the projected
                             // descent direction for the forward scheme)
  double kkt = 0.0;
  int newton_iters = 0;
  int restarts = 0;
  double energy = 0.0;
};

struct FlowTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
};

struct MuFlowResult {
  Vec mu;
  FlowTrace trace;
};

struct SigmaFlowResult {
  Vec sigma;
  FlowTrace trace;
};

// One proximal step: Newton on grad G(.; sigma_old, tau) = 0 started at
// sigma_old, accepted when the componentwise residual criterion holds and no
// component changed sign (zero is compatible with either sign).
struct StepResult {
  Vec sigma;
  EnergyPoint point;
  int newton_iters = 0;
  bool accepted = false;
};

StepResult backward_euler_step(const EnergyPoint& old_point, double tau,
                               const EnergyModel& model, const FlowConfig& cfg);

MuFlowResult projected_forward_euler(const Vec& mu0, const EnergyModel& model,
                                     const FlowConfig& cfg);

SigmaFlowResult backward_euler_flow(const Vec& sigma0, const EnergyModel& model,
                                    const FlowConfig& cfg);

SigmaFlowResult adaptive_flow(const Vec& sigma0, const EnergyModel& model,
                              const FlowConfig& cfg);

// The implementable middle inequality of the a-posteriori exit rule:
// ||grad F(sigma_l)|| <= tau_l * toll, evaluated on the last trace row.
bool exit_criterion(const FlowTrace& trace, double tau_l, double toll);

// sqrt(sum_i areas_i x_i^2)
double weighted_l2(const Vec& x, const Vec& areas);

}  // namespace otdens
