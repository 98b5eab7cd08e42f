/* otdens - L1 optimal transport density solver.
 *
 * C interface over the solver core: opaque handles, integer status codes,
 * and a thread-local detail message for the last error. A problem handle
 * bundles the benchmark geometry at one mesh level with one relaxation rule;
 * a result handle owns a finished run (trace, fields, diagnostics) and the
 * writers for its output files.
 */
#ifndef OTDENS_H
#define OTDENS_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum otdens_status {
  OTDENS_OK = 0,
  OTDENS_ERR_INVALID_ARGUMENT = 1,
  OTDENS_ERR_ALIGNMENT = 2,
  OTDENS_ERR_DOMAIN = 3,
  OTDENS_ERR_NUMERICAL = 4,
  OTDENS_ERR_DEGENERATE_START = 5,
  OTDENS_ERR_NEWTON_FAILURE = 6,
  OTDENS_ERR_STAGNATION = 7,
  OTDENS_ERR_STEP_SIZE = 8,
  OTDENS_ERR_CAPACITY = 9,
  OTDENS_ERR_INSUFFICIENT_DATA = 10,
  OTDENS_ERR_BUDGET_EXHAUSTED = 11,
  OTDENS_ERR_IO = 12,
  OTDENS_ERR_UNKNOWN = 13
} otdens_status;

typedef struct otdens_problem otdens_problem;
typedef struct otdens_result otdens_result;

typedef struct otdens_flow_config {
  double tau0;
  double alpha;
  double eps;
  double toll;
  double kkt_toll;
  long n_step;
  int r_max;
} otdens_flow_config;

typedef struct otdens_trace_row {
  long step;
  double tau;
  double delta_sigma;
  double grad_norm;
  double kkt;
  int newton_iters;
  int restarts;
  double energy;
} otdens_trace_row;

const char* otdens_version(void);
const char* otdens_status_string(otdens_status status);
/* Detail message of the most recent failure on this thread; empty if none. */
const char* otdens_last_error(void);

void otdens_flow_config_default(otdens_flow_config* cfg);

/* delta_rule is "h" or "h2"; level >= 0 selects the mesh in the refinement
 * hierarchy (level 0 starts from 8 subdivisions per side). */
otdens_status otdens_problem_create(int level, const char* delta_rule,
                                    otdens_problem** out);
void otdens_problem_destroy(otdens_problem* problem);

int otdens_problem_cell_count(const otdens_problem* problem);
double otdens_problem_mesh_h(const otdens_problem* problem);
double otdens_problem_delta(const otdens_problem* problem);

/* algorithm is "alg1" (projected forward Euler), "alg2" (backward Euler with
 * Newton) or "alg3" (adaptive backward Euler). cfg may be NULL for defaults.
 * On OTDENS_OK *out owns the run; budget exhaustion still produces a result
 * and returns OTDENS_ERR_BUDGET_EXHAUSTED. */
otdens_status otdens_solve(const otdens_problem* problem, const char* algorithm,
                           const otdens_flow_config* cfg, otdens_result** out);
void otdens_result_destroy(otdens_result* result);

int otdens_result_converged(const otdens_result* result);
long otdens_result_steps(const otdens_result* result);
double otdens_result_energy(const otdens_result* result);
double otdens_result_kkt(const otdens_result* result);
double otdens_result_grad_norm(const otdens_result* result);
otdens_status otdens_result_trace_row(const otdens_result* result, long row,
                                      otdens_trace_row* out);
/* Copies the converged density into buf (length >= cell count). */
otdens_status otdens_result_mu(const otdens_result* result, double* buf, int buflen);
/* Extremal eigenvalues of Hess F at the computed optimum (computed on first
 * call, cached afterwards). */
otdens_status otdens_result_spectrum(const otdens_result* result, double* lambda_min,
                                     double* lambda_max);
/* Errors against the known exact solution of the benchmark problem. */
otdens_status otdens_result_errors(const otdens_result* result, double* l2_mu_error,
                                   double* w1_error);

otdens_status otdens_result_write_trace_csv(const otdens_result* result, const char* path);
otdens_status otdens_result_write_vtk(const otdens_result* result, const char* path);
otdens_status otdens_result_write_summary(const otdens_result* result, const char* path);

/* Full convergence study: runs every level, writes per-level outputs plus
 * convergence.csv and spectrum.csv under out_dir. Returns OTDENS_OK when all
 * levels converged, OTDENS_ERR_BUDGET_EXHAUSTED when some level failed (the
 * study still completes the remaining levels). Fitted slopes are returned
 * through the optional out pointers. */
otdens_status otdens_study(const int* levels, int n_levels, const char* delta_rule,
                           const char* algorithm, const otdens_flow_config* cfg,
                           const char* out_dir, int parallel, double* slope_l2_mu,
                           double* slope_w1);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OTDENS_H */
