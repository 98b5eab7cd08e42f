// Experiment CLI over the otdens C API: single solves and the multi-level
// convergence study.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "otdens.h"

namespace {

struct CommonOpts {
  std::string delta_rule = "h2";
  std::string algorithm = "alg2";
  otdens_flow_config flow{};
  std::string out_dir = "out";
};

void add_flow_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--delta", o.delta_rule, "relaxation rule: h or h2")
      ->check(CLI::IsMember({"h", "h2"}));
  cmd->add_option("--alg", o.algorithm, "algorithm: alg1, alg2 or alg3")
      ->check(CLI::IsMember({"alg1", "alg2", "alg3"}));
  cmd->add_option("--tau", o.flow.tau0, "time-step size tau0");
  cmd->add_option("--alpha", o.flow.alpha, "adaptive growth factor (> 1)");
  cmd->add_option("--eps", o.flow.eps, "Newton stopping constant");
  cmd->add_option("--toll", o.flow.toll, "outer tolerance on ||grad F||");
  cmd->add_option("--kkt_toll", o.flow.kkt_toll, "activity threshold of the KKT residual");
  cmd->add_option("--n_step", o.flow.n_step, "maximum number of time steps");
  cmd->add_option("--r_max", o.flow.r_max, "Newton iterations per step before failure");
  cmd->add_option("--out", o.out_dir, "output directory")
      ->envname("OTDENS_OUT_DIR");
}

int fail(otdens_status st, const char* what) {
  std::fprintf(stderr, "otdens: %s: %s", what, otdens_status_string(st));
  const char* detail = otdens_last_error();
  if (detail != nullptr && detail[0] != '\0') std::fprintf(stderr, " (%s)", detail);
  std::fprintf(stderr, "\n");
  return st == OTDENS_ERR_BUDGET_EXHAUSTED ? 2 : 1;
}

int run_solve(int level, const CommonOpts& o) {
  otdens_problem* problem = nullptr;
  otdens_status st = otdens_problem_create(level, o.delta_rule.c_str(), &problem);
  if (st != OTDENS_OK) return fail(st, "problem setup");

  otdens_result* result = nullptr;
  st = otdens_solve(problem, o.algorithm.c_str(), &o.flow, &result);
  if (st != OTDENS_OK && st != OTDENS_ERR_BUDGET_EXHAUSTED) {
    otdens_problem_destroy(problem);
    return fail(st, "solve");
  }

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  const std::string trace = o.out_dir + "/trace.csv";
  const std::string field = o.out_dir + "/mu.vtk";
  const std::string summary = o.out_dir + "/summary.txt";
  otdens_status wst = otdens_result_write_trace_csv(result, trace.c_str());
  if (wst == OTDENS_OK) wst = otdens_result_write_vtk(result, field.c_str());
  if (wst == OTDENS_OK) wst = otdens_result_write_summary(result, summary.c_str());

  std::printf("level %d  %s  delta=%s  steps=%ld  converged=%d\n", level,
              o.algorithm.c_str(), o.delta_rule.c_str(), otdens_result_steps(result),
              otdens_result_converged(result));
  std::printf("energy=%.12g  kkt=%.3e  grad_norm=%.3e\n", otdens_result_energy(result),
              otdens_result_kkt(result), otdens_result_grad_norm(result));
  std::printf("outputs: %s, %s, %s\n", trace.c_str(), field.c_str(), summary.c_str());

  otdens_result_destroy(result);
  otdens_problem_destroy(problem);
  if (wst != OTDENS_OK) return fail(wst, "write outputs");
  return st == OTDENS_OK ? 0 : 2;
}

int run_study(const std::vector<int>& levels, const CommonOpts& o, bool parallel) {
  double slope_mu = 0.0, slope_w1 = 0.0;
  const otdens_status st =
      otdens_study(levels.data(), static_cast<int>(levels.size()), o.delta_rule.c_str(),
                   o.algorithm.c_str(), &o.flow, o.out_dir.c_str(), parallel ? 1 : 0,
                   &slope_mu, &slope_w1);
  if (st != OTDENS_OK && st != OTDENS_ERR_BUDGET_EXHAUSTED) return fail(st, "study");
  std::printf("study delta=%s alg=%s levels=%zu\n", o.delta_rule.c_str(),
              o.algorithm.c_str(), levels.size());
  std::printf("slope_l2_mu=%.4f  slope_w1=%.4f\n", slope_mu, slope_w1);
  std::printf("outputs under %s (convergence.csv, spectrum.csv, level*/)\n",
              o.out_dir.c_str());
  if (st == OTDENS_ERR_BUDGET_EXHAUSTED) return fail(st, "study");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L1 optimal transport density solver"};
  app.set_version_flag("--version", otdens_version());
  app.set_config("--config", "", "key=value configuration file; flags win");
  app.require_subcommand(1);

  CommonOpts solve_opts, study_opts;
  otdens_flow_config_default(&solve_opts.flow);
  otdens_flow_config_default(&study_opts.flow);
  study_opts.algorithm = "alg3";

  int level = 0;
  CLI::App* solve = app.add_subcommand("solve", "run one algorithm at one mesh level");
  solve->add_option("--level", level, "mesh level (0 = coarsest)")
      ->check(CLI::Range(0, 8));
  add_flow_options(solve, solve_opts);

  std::vector<int> levels{0, 1, 2, 3};
  bool sequential = false;
  CLI::App* study = app.add_subcommand("study", "multi-level convergence study");
  study->add_option("--levels", levels, "mesh levels, strictly increasing")
      ->delimiter(',');
  study->add_flag("--sequential", sequential, "run levels one after another");
  add_flow_options(study, study_opts);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return run_solve(level, solve_opts);
  return run_study(levels, study_opts, !sequential);
}
