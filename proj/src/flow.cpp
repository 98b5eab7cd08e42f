#include "flow.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace otdens {

void FlowConfig::validate() const {
  if (!(tau0 > 0.0)) throw std::invalid_argument("FlowConfig: tau0 must be positive");
  if (!(alpha > 1.0)) throw std::invalid_argument("FlowConfig: alpha must be > 1");
  if (!(eps > 0.0)) throw std::invalid_argument("FlowConfig: eps must be positive");
  if (!(toll > 0.0)) throw std::invalid_argument("FlowConfig: toll must be positive");
  if (!(kkt_toll > 0.0)) throw std::invalid_argument("FlowConfig: kkt_toll must be positive");
  if (n_step < 1) throw std::invalid_argument("FlowConfig: n_step must be >= 1");
  if (r_max < 1) throw std::invalid_argument("FlowConfig: r_max must be >= 1");
}

double weighted_l2(const Vec& x, const Vec& areas) {
  return std::sqrt(areas.dot(x.cwiseProduct(x)));
}

bool exit_criterion(const FlowTrace& trace, double tau_l, double toll) {
  if (trace.rows.empty()) throw std::invalid_argument("exit_criterion: empty trace");
  return trace.rows.back().grad_norm <= tau_l * toll;
}

namespace {

bool signs_compatible(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0 || b[i] == 0.0) continue;
    if ((a[i] > 0.0) != (b[i] > 0.0)) return false;
  }
  return true;
}

// Newton direction d solving (Hess F + I/tau) d = -gradG.
Vec newton_direction(const EnergyModel& model, const EnergyPoint& p, const Vec& gradG,
                     double tau, const FlowConfig& cfg) {
  const int n = static_cast<int>(gradG.size());
  if (n <= cfg.newton_dense_limit) {
    Mat H = model.hess_F_dense(p);
    H.diagonal().array() += 1.0 / tau;
    return Eigen::LDLT<Mat>(H).solve(-gradG);
  }

  // Truncated CG with an Eisenstat-Walker style forcing term; negative
  // curvature falls back to the best iterate so far (steepest descent on the
  // first pass).
  const double gnorm = gradG.norm();
  const double rel = std::min(cfg.cg_tol_cap, std::sqrt(gnorm));
  Vec x = Vec::Zero(n);
  Vec r = -gradG;
  Vec pdir = r;
  double rr = r.squaredNorm();
  const double stop = rel * gnorm;
  for (int it = 0; it < cfg.cg_max_iter; ++it) {
    if (std::sqrt(rr) <= stop) break;
    Vec Hp = model.prox_hess_vec(p, pdir, tau);
    const double pHp = pdir.dot(Hp);
    if (pHp <= 0.0) {
      if (it == 0) return r;
      break;
    }
    const double a = rr / pHp;
    x += a * pdir;
    r -= a * Hp;
    const double rr_new = r.squaredNorm();
    pdir = r + (rr_new / rr) * pdir;
    rr = rr_new;
  }
  return x;
}

}  // namespace

StepResult backward_euler_step(const EnergyPoint& old_point, double tau,
                               const EnergyModel& model, const FlowConfig& cfg) {
  if (!old_point.has_sigma())
    throw std::invalid_argument("backward_euler_step: point carries no sigma");
  const Vec& sigma_old = old_point.sigma;
  const Vec& areas = model.context().areas;

  StepResult res;
  res.sigma = sigma_old;
  res.point = old_point;

  // The residual test carries a rounding floor: once a component sits at its
  // fixed point the increment underflows the gradient's attainable accuracy,
  // so the bare criterion can never fire. The floor is a few hundred ulps of
  // the magnitudes entering grad G before cancellation.
  constexpr double kFloor = 1.4e-14;

  for (int r = 0;; ++r) {
    const Vec gradG = model.prox_grad(res.point, sigma_old, tau);
    bool ok = signs_compatible(res.sigma, sigma_old);
    if (ok) {
      for (int i = 0; i < gradG.size(); ++i) {
        const double dsig = std::abs(res.sigma[i] - sigma_old[i]);
        // the last term is the quantization of the proximal difference:
        // increments below one ulp of sigma cannot move grad G
        const double scale =
            2.0 * std::abs(res.point.sigma[i]) * (areas[i] + res.point.cell_quad_abs[i]) +
            (dsig + std::abs(res.sigma[i]) + std::abs(sigma_old[i])) / tau;
        if (std::abs(gradG[i]) > cfg.eps * dsig + kFloor * scale) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      res.newton_iters = r;
      res.accepted = true;
      return res;
    }
    if (r >= cfg.r_max) {
      res.newton_iters = r;
      res.accepted = false;
      return res;
    }
    const Vec d = newton_direction(model, res.point, gradG, tau, cfg);
    res.sigma += d;
    res.point = model.at_sigma(res.sigma);
  }
}

MuFlowResult projected_forward_euler(const Vec& mu0, const EnergyModel& model,
                                     const FlowConfig& cfg) {
  cfg.validate();
  const Vec& areas = model.context().areas;

  MuFlowResult out;
  out.mu = mu0;
  EnergyPoint point = model.at_mu(out.mu);
  double energy_prev = point.value;

  for (long s = 1; s <= cfg.n_step; ++s) {
    // v = -grad E, with ascent components cleared on the active boundary
    Vec v = point.cell_quad - areas;
    for (int i = 0; i < v.size(); ++i)
      if (out.mu[i] == 0.0) v[i] = std::max(v[i], 0.0);
    const double err = v.norm();

    const Vec mu_new = (out.mu + cfg.tau0 * v).cwiseMax(0.0);
    EnergyPoint point_new = model.at_mu(mu_new);

    const double slack = 1e-12 * std::max(1.0, std::abs(energy_prev));
    if (point_new.value > energy_prev + slack)
      throw StepSizeTooLarge("projected_forward_euler: energy increased across a step", s,
                             point_new.value - energy_prev);

    TraceRow row;
    row.step = s;
    row.tau = cfg.tau0;
    row.delta_sigma = weighted_l2(mu_new - out.mu, areas);
    row.grad_norm = err;
    row.kkt = model.kkt_residual(point_new, cfg.kkt_toll);
    row.energy = point_new.value;
    out.trace.rows.push_back(row);

    out.mu = mu_new;
    point = std::move(point_new);
    energy_prev = point.value;

    if (err <= cfg.toll) {
      out.trace.converged = true;
      break;
    }
  }
  return out;
}

namespace {

SigmaFlowResult run_implicit_flow(const Vec& sigma0, const EnergyModel& model,
                                  const FlowConfig& cfg, bool adaptive) {
  cfg.validate();
  const Vec& areas = model.context().areas;

  EnergyPoint point = model.at_sigma(sigma0);
  double res = model.grad_F(point).norm();
  if (res <= cfg.toll)
    throw DegenerateStartError("implicit flow: grad F vanishes at the initial iterate");

  SigmaFlowResult out;
  out.sigma = sigma0;
  double tau = cfg.tau0;

  for (long l = 1; l <= cfg.n_step && res > cfg.toll; ++l) {
    int restarts = 0;
    StepResult step;
    if (adaptive) {
      tau *= cfg.alpha;
      for (;;) {
        step = backward_euler_step(point, tau, model, cfg);
        if (step.accepted) break;
        tau /= cfg.alpha;
        ++restarts;
        if (tau < 1e-14 * cfg.tau0)
          throw StagnationError("adaptive flow: time step underflow after restarts");
      }
    } else {
      step = backward_euler_step(point, tau, model, cfg);
      if (!step.accepted)
        throw NewtonFailure("backward Euler: Newton did not meet the stopping criterion",
                            step.newton_iters, l - 1);
    }

    res = model.grad_F(step.point).norm();

    TraceRow row;
    row.step = l;
    row.tau = tau;
    row.delta_sigma = weighted_l2(step.sigma - out.sigma, areas);
    row.grad_norm = res;
    row.kkt = model.kkt_residual(step.point, cfg.kkt_toll);
    row.newton_iters = step.newton_iters;
    row.restarts = restarts;
    row.energy = step.point.value;
    out.trace.rows.push_back(row);

    out.sigma = step.sigma;
    point = std::move(step.point);
  }

  out.trace.converged = res <= cfg.toll;
  return out;
}

}  // namespace

SigmaFlowResult backward_euler_flow(const Vec& sigma0, const EnergyModel& model,
                                    const FlowConfig& cfg) {
  return run_implicit_flow(sigma0, model, cfg, /*adaptive=*/false);
}

SigmaFlowResult adaptive_flow(const Vec& sigma0, const EnergyModel& model,
                              const FlowConfig& cfg) {
  return run_implicit_flow(sigma0, model, cfg, /*adaptive=*/true);
}

}  // namespace otdens
