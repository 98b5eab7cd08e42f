// C API implementation: maps core exceptions onto status codes and keeps the
// detail message in thread-local storage.

#include "otdens.h"

#include <cstring>
#include <string>

#include "runner.hpp"

using namespace otdens;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
otdens_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return OTDENS_ERR_INVALID_ARGUMENT;
  } catch (const AlignmentError& e) {
    set_error(e.what());
    return OTDENS_ERR_ALIGNMENT;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return OTDENS_ERR_DOMAIN;
  } catch (const CompatibilityError& e) {
    set_error(e.what());
    return OTDENS_ERR_NUMERICAL;
  } catch (const DegenerateStartError& e) {
    set_error(e.what());
    return OTDENS_ERR_DEGENERATE_START;
  } catch (const NewtonFailure& e) {
    set_error(e.what());
    return OTDENS_ERR_NEWTON_FAILURE;
  } catch (const StagnationError& e) {
    set_error(e.what());
    return OTDENS_ERR_STAGNATION;
  } catch (const StepSizeTooLarge& e) {
    set_error(e.what());
    return OTDENS_ERR_STEP_SIZE;
  } catch (const CapacityError& e) {
    set_error(e.what());
    return OTDENS_ERR_CAPACITY;
  } catch (const InsufficientDataError& e) {
    set_error(e.what());
    return OTDENS_ERR_INSUFFICIENT_DATA;
  } catch (const NumericalFailure& e) {
    set_error(e.what());
    return OTDENS_ERR_NUMERICAL;
  } catch (const IoError& e) {
    set_error(e.what());
    return OTDENS_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return OTDENS_ERR_UNKNOWN;
  } catch (...) {
    set_error("unknown error");
    return OTDENS_ERR_UNKNOWN;
  }
}

FlowConfig to_flow_config(const otdens_flow_config* cfg) {
  FlowConfig fc;
  if (cfg != nullptr) {
    fc.tau0 = cfg->tau0;
    fc.alpha = cfg->alpha;
    fc.eps = cfg->eps;
    fc.toll = cfg->toll;
    fc.kkt_toll = cfg->kkt_toll;
    fc.n_step = cfg->n_step;
    fc.r_max = cfg->r_max;
  }
  return fc;
}

}  // namespace

struct otdens_problem {
  ProblemSetup setup;
};

struct otdens_result {
  ProblemSetup setup;  // shared handles keep the model alive
  Algorithm algorithm = Algorithm::alg2;
  FlowConfig flow;
  SolveOutcome outcome;
  mutable RunRecord record;
  mutable bool has_spectrum = false;
  mutable bool has_errors = false;
};

extern "C" {

const char* otdens_version(void) { return "0.1.0"; }

const char* otdens_status_string(otdens_status status) {
  switch (status) {
    case OTDENS_OK: return "ok";
    case OTDENS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case OTDENS_ERR_ALIGNMENT: return "alignment error";
    case OTDENS_ERR_DOMAIN: return "domain error";
    case OTDENS_ERR_NUMERICAL: return "numerical failure";
    case OTDENS_ERR_DEGENERATE_START: return "degenerate start";
    case OTDENS_ERR_NEWTON_FAILURE: return "newton failure";
    case OTDENS_ERR_STAGNATION: return "stagnation";
    case OTDENS_ERR_STEP_SIZE: return "step size too large";
    case OTDENS_ERR_CAPACITY: return "capacity exceeded";
    case OTDENS_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case OTDENS_ERR_BUDGET_EXHAUSTED: return "iteration budget exhausted";
    case OTDENS_ERR_IO: return "io error";
    default: return "unknown error";
  }
}

const char* otdens_last_error(void) { return g_last_error.c_str(); }

void otdens_flow_config_default(otdens_flow_config* cfg) {
  if (cfg == nullptr) return;
  const FlowConfig fc;
  cfg->tau0 = fc.tau0;
  cfg->alpha = fc.alpha;
  cfg->eps = fc.eps;
  cfg->toll = fc.toll;
  cfg->kkt_toll = fc.kkt_toll;
  cfg->n_step = fc.n_step;
  cfg->r_max = fc.r_max;
}

otdens_status otdens_problem_create(int level, const char* delta_rule, otdens_problem** out) {
  return guarded([&]() {
    if (out == nullptr || delta_rule == nullptr)
      throw std::invalid_argument("otdens_problem_create: null argument");
    auto p = new otdens_problem{ProblemSetup::build(level, delta_rule_from_string(delta_rule))};
    *out = p;
    return OTDENS_OK;
  });
}

void otdens_problem_destroy(otdens_problem* problem) { delete problem; }

int otdens_problem_cell_count(const otdens_problem* problem) {
  return problem ? problem->setup.coarse.triangle_count() : 0;
}

double otdens_problem_mesh_h(const otdens_problem* problem) {
  return problem ? problem->setup.h : 0.0;
}

double otdens_problem_delta(const otdens_problem* problem) {
  return problem ? problem->setup.delta : 0.0;
}

otdens_status otdens_solve(const otdens_problem* problem, const char* algorithm,
                           const otdens_flow_config* cfg, otdens_result** out) {
  return guarded([&]() {
    if (problem == nullptr || algorithm == nullptr || out == nullptr)
      throw std::invalid_argument("otdens_solve: null argument");
    const Algorithm alg = algorithm_from_string(algorithm);
    FlowConfig fc = to_flow_config(cfg);
    fc.validate();
    auto res = std::make_unique<otdens_result>();
    res->setup = problem->setup;
    res->algorithm = alg;
    res->flow = fc;
    res->outcome = run_algorithm(problem->setup, alg, fc);
    res->record = make_record(res->setup, alg, fc, res->outcome, false, false);
    const bool converged = res->outcome.converged;
    *out = res.release();
    return converged ? OTDENS_OK : OTDENS_ERR_BUDGET_EXHAUSTED;
  });
}

void otdens_result_destroy(otdens_result* result) { delete result; }

int otdens_result_converged(const otdens_result* r) {
  return (r != nullptr && r->outcome.converged) ? 1 : 0;
}

long otdens_result_steps(const otdens_result* r) {
  return r ? static_cast<long>(r->outcome.trace.rows.size()) : 0;
}

double otdens_result_energy(const otdens_result* r) { return r ? r->outcome.energy : 0.0; }
double otdens_result_kkt(const otdens_result* r) { return r ? r->outcome.kkt : 0.0; }
double otdens_result_grad_norm(const otdens_result* r) { return r ? r->outcome.grad_norm : 0.0; }

otdens_status otdens_result_trace_row(const otdens_result* r, long row, otdens_trace_row* out) {
  return guarded([&]() {
    if (r == nullptr || out == nullptr)
      throw std::invalid_argument("otdens_result_trace_row: null argument");
    if (row < 0 || row >= static_cast<long>(r->outcome.trace.rows.size()))
      throw std::invalid_argument("otdens_result_trace_row: row out of range");
    const TraceRow& t = r->outcome.trace.rows[static_cast<size_t>(row)];
    out->step = t.step;
    out->tau = t.tau;
    out->delta_sigma = t.delta_sigma;
    out->grad_norm = t.grad_norm;
    out->kkt = t.kkt;
    out->newton_iters = t.newton_iters;
    out->restarts = t.restarts;
    out->energy = t.energy;
    return OTDENS_OK;
  });
}

otdens_status otdens_result_mu(const otdens_result* r, double* buf, int buflen) {
  return guarded([&]() {
    if (r == nullptr || buf == nullptr)
      throw std::invalid_argument("otdens_result_mu: null argument");
    const int n = static_cast<int>(r->outcome.mu.size());
    if (buflen < n) throw std::invalid_argument("otdens_result_mu: buffer too small");
    std::memcpy(buf, r->outcome.mu.data(), sizeof(double) * static_cast<size_t>(n));
    return OTDENS_OK;
  });
}

otdens_status otdens_result_spectrum(const otdens_result* r, double* lambda_min,
                                     double* lambda_max) {
  return guarded([&]() {
    if (r == nullptr) throw std::invalid_argument("otdens_result_spectrum: null result");
    if (!r->has_spectrum) {
      const Vec sigma =
          r->outcome.sigma.size() ? r->outcome.sigma : Vec(r->outcome.mu.cwiseSqrt());
      r->record.spectrum = hess_F_extremal_eigs(*r->setup.model, sigma, r->setup.level);
      r->has_spectrum = true;
    }
    if (lambda_min != nullptr) *lambda_min = r->record.spectrum->lambda_min;
    if (lambda_max != nullptr) *lambda_max = r->record.spectrum->lambda_max;
    return OTDENS_OK;
  });
}

otdens_status otdens_result_errors(const otdens_result* r, double* l2_mu_error,
                                   double* w1_error) {
  return guarded([&]() {
    if (r == nullptr) throw std::invalid_argument("otdens_result_errors: null result");
    if (!r->has_errors) {
      r->record.errors = error_report(r->outcome.mu, r->outcome.energy, r->setup.coarse);
      r->has_errors = true;
    }
    if (l2_mu_error != nullptr) *l2_mu_error = r->record.errors->l2_mu_error;
    if (w1_error != nullptr) *w1_error = r->record.errors->w1_error;
    return OTDENS_OK;
  });
}

otdens_status otdens_result_write_trace_csv(const otdens_result* r, const char* path) {
  return guarded([&]() {
    if (r == nullptr || path == nullptr)
      throw std::invalid_argument("otdens_result_write_trace_csv: null argument");
    write_trace_csv(r->record, path);
    return OTDENS_OK;
  });
}

otdens_status otdens_result_write_vtk(const otdens_result* r, const char* path) {
  return guarded([&]() {
    if (r == nullptr || path == nullptr)
      throw std::invalid_argument("otdens_result_write_vtk: null argument");
    write_field_vtk(r->setup.coarse, r->outcome.mu, path);
    return OTDENS_OK;
  });
}

otdens_status otdens_result_write_summary(const otdens_result* r, const char* path) {
  return guarded([&]() {
    if (r == nullptr || path == nullptr)
      throw std::invalid_argument("otdens_result_write_summary: null argument");
    write_run_summary(r->record, path);
    return OTDENS_OK;
  });
}

otdens_status otdens_study(const int* levels, int n_levels, const char* delta_rule,
                           const char* algorithm, const otdens_flow_config* cfg,
                           const char* out_dir, int parallel, double* slope_l2_mu,
                           double* slope_w1) {
  return guarded([&]() {
    if (levels == nullptr || n_levels < 1 || delta_rule == nullptr || algorithm == nullptr ||
        out_dir == nullptr)
      throw std::invalid_argument("otdens_study: null or empty argument");
    StudySpec spec;
    spec.levels.assign(levels, levels + n_levels);
    spec.rule = delta_rule_from_string(delta_rule);
    spec.algorithm = algorithm_from_string(algorithm);
    spec.flow = to_flow_config(cfg);
    spec.flow.validate();
    spec.out_dir = out_dir;
    spec.parallel = parallel != 0;
    const StudyResult res = run_study(spec);
    if (slope_l2_mu != nullptr) *slope_l2_mu = res.slope_l2_mu;
    if (slope_w1 != nullptr) *slope_w1 = res.slope_w1;
    if (res.failed > 0) {
      set_error("study: " + std::to_string(res.failed) + " level(s) failed");
      return OTDENS_ERR_BUDGET_EXHAUSTED;
    }
    return OTDENS_OK;
  });
}

}  // extern "C"
