#include "runner.hpp"

#include <chrono>
#include <filesystem>
#include <future>

namespace otdens {

DeltaRule delta_rule_from_string(const std::string& s) {
  if (s == "h") return DeltaRule::h;
  if (s == "h2") return DeltaRule::h2;
  throw std::invalid_argument("delta rule must be 'h' or 'h2', got '" + s + "'");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "alg1") return Algorithm::alg1;
  if (s == "alg2") return Algorithm::alg2;
  if (s == "alg3") return Algorithm::alg3;
  throw std::invalid_argument("algorithm must be 'alg1', 'alg2' or 'alg3', got '" + s + "'");
}

std::string to_string(DeltaRule r) { return r == DeltaRule::h ? "h" : "h2"; }

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::alg1: return "alg1";
    case Algorithm::alg2: return "alg2";
    default: return "alg3";
  }
}

ProblemSetup ProblemSetup::build(int level, DeltaRule rule, const SolverConfig& scfg, int k0) {
  if (level < 0) throw std::invalid_argument("level must be nonnegative");
  if (k0 < 8 || k0 % 8 != 0)
    throw std::invalid_argument("base divisions must be a positive multiple of 8");

  ProblemSetup s;
  s.level = level;
  s.rule = rule;
  s.coarse = build_unit_square_mesh(k0);
  for (int i = 0; i < level; ++i) s.coarse = refine(s.coarse).first;
  auto [fine, rmap] = refine(s.coarse);
  s.fine = std::move(fine);
  s.rmap = std::move(rmap);
  s.K = std::make_shared<const CellStiffnessSet>(
      CellStiffnessSet::assemble(s.coarse, s.fine, s.rmap));
  s.problem = RectTransportProblem::benchmark_default();
  s.h = s.coarse.mesh_parameter();
  s.delta = rule == DeltaRule::h ? s.h : s.h * s.h;

  EnergyContext ctx;
  ctx.K = s.K;
  ctx.f = assemble_load(s.problem.plus, s.problem.minus, s.fine, s.problem.density);
  ctx.areas = Eigen::Map<const Vec>(s.coarse.areas.data(),
                                    static_cast<Eigen::Index>(s.coarse.areas.size()));
  ctx.delta = s.delta;
  ctx.solver = scfg;
  s.model = std::make_shared<const EnergyModel>(std::move(ctx));
  return s;
}

SolveOutcome run_algorithm(const ProblemSetup& setup, Algorithm alg, const FlowConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const EnergyModel& model = *setup.model;
  const int n = model.cell_count();

  SolveOutcome out;
  if (alg == Algorithm::alg1) {
    MuFlowResult r = projected_forward_euler(Vec::Ones(n), model, cfg);
    out.mu = std::move(r.mu);
    out.trace = std::move(r.trace);
  } else {
    SigmaFlowResult r = alg == Algorithm::alg2 ? backward_euler_flow(Vec::Ones(n), model, cfg)
                                               : adaptive_flow(Vec::Ones(n), model, cfg);
    out.sigma = std::move(r.sigma);
    out.mu = out.sigma.array().square();
    out.trace = std::move(r.trace);
  }
  out.converged = out.trace.converged;

  const EnergyPoint p = model.at_mu(out.mu);
  out.energy = p.value;
  out.kkt = model.kkt_residual(p, cfg.kkt_toll);
  out.grad_norm = out.sigma.size()
                      ? (2.0 * out.sigma.cwiseProduct(p.grad_e)).norm()
                      : model.minimal_subdifferential(p).norm();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunRecord make_record(const ProblemSetup& setup, Algorithm alg, const FlowConfig& cfg,
                      const SolveOutcome& outcome, bool with_spectrum, bool with_errors) {
  RunRecord rec;
  rec.algorithm = to_string(alg);
  rec.delta_rule = to_string(setup.rule);
  rec.level = setup.level;
  rec.delta = setup.delta;
  rec.h = setup.h;
  rec.flow = cfg;
  rec.config_hash = sha1_hex(config_snapshot(rec));
  rec.rows = outcome.trace.rows;
  rec.converged = outcome.converged;
  rec.kkt = outcome.kkt;
  rec.grad_norm = outcome.grad_norm;
  rec.energy = outcome.energy;
  rec.wall_seconds = outcome.wall_seconds;

  if (with_spectrum) {
    const Vec sigma = outcome.sigma.size() ? outcome.sigma : Vec(outcome.mu.cwiseSqrt());
    rec.spectrum = hess_F_extremal_eigs(*setup.model, sigma, setup.level);
  }
  if (with_errors) rec.errors = error_report(outcome.mu, outcome.energy, setup.coarse);
  return rec;
}

void StudySpec::validate() const {
  flow.validate();
  if (levels.empty()) throw std::invalid_argument("StudySpec: levels must be nonempty");
  for (size_t i = 0; i + 1 < levels.size(); ++i)
    if (levels[i] >= levels[i + 1])
      throw std::invalid_argument("StudySpec: levels must be strictly increasing");
  if (levels.front() < 0) throw std::invalid_argument("StudySpec: levels must be nonnegative");
  if (out_dir.empty()) throw std::invalid_argument("StudySpec: output directory required");
}

namespace {

StudyLevelResult run_one_level(const StudySpec& spec, int level) {
  StudyLevelResult r;
  r.level = level;
  try {
    const ProblemSetup setup = ProblemSetup::build(level, spec.rule, {}, spec.k0);
    const SolveOutcome outcome = run_algorithm(setup, spec.algorithm, spec.flow);
    r.record = make_record(setup, spec.algorithm, spec.flow, outcome,
                           /*with_spectrum=*/true, /*with_errors=*/true);

    const std::filesystem::path dir =
        std::filesystem::path(spec.out_dir) / ("level" + std::to_string(level));
    std::filesystem::create_directories(dir);
    write_trace_csv(r.record, (dir / "trace.csv").string());
    write_field_vtk(setup.coarse, outcome.mu, (dir / "mu.vtk").string());
    write_run_summary(r.record, (dir / "summary.txt").string());

    r.ok = r.record.converged;
    if (!r.ok) r.error = "iteration budget exhausted";
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

}  // namespace

StudyResult run_study(const StudySpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.out_dir);

  StudyResult result;
  result.levels.resize(spec.levels.size());

  if (spec.parallel && spec.levels.size() > 1) {
    std::vector<std::future<StudyLevelResult>> futs;
    futs.reserve(spec.levels.size());
    for (int level : spec.levels)
      futs.push_back(std::async(std::launch::async, run_one_level, std::cref(spec), level));
    for (size_t i = 0; i < futs.size(); ++i) result.levels[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < spec.levels.size(); ++i)
      result.levels[i] = run_one_level(spec, spec.levels[i]);
  }

  std::vector<LevelErrorRecord> errs;
  std::vector<SpectrumRecord> spectra;
  for (const StudyLevelResult& lr : result.levels) {
    if (!lr.ok) {
      ++result.failed;
      continue;
    }
    if (lr.record.errors)
      errs.push_back({lr.level, lr.record.h, lr.record.errors->l2_mu_error,
                      lr.record.errors->w1_error});
    if (lr.record.spectrum) spectra.push_back({lr.level, lr.record.h, *lr.record.spectrum});
  }

  const std::filesystem::path root(spec.out_dir);
  if (errs.size() >= 2) {
    write_convergence_table(errs, (root / "convergence.csv").string());
    std::vector<double> h, e1, e2;
    for (const auto& e : errs) {
      h.push_back(e.h);
      e1.push_back(e.l2_mu_error);
      e2.push_back(e.w1_error);
    }
    result.slope_l2_mu = loglog_slope(h, e1);
    result.slope_w1 = loglog_slope(h, e2);
  }
  if (!spectra.empty()) write_spectrum_table(spectra, (root / "spectrum.csv").string());
  return result;
}

}  // namespace otdens
