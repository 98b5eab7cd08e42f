#include "energy.hpp"

#include <cmath>

namespace otdens {

void EnergyContext::validate() const {
  if (!K) throw std::invalid_argument("EnergyContext: missing stiffness blocks");
  if (areas.size() != K->cell_count())
    throw std::invalid_argument("EnergyContext: areas size != cell count");
  if (f.size() != K->dim()) throw std::invalid_argument("EnergyContext: load size mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("EnergyContext: delta must be positive");
}

EnergyModel::EnergyModel(EnergyContext ctx)
    : ctx_(std::move(ctx)), pool_(std::make_shared<FactorPool>()) {
  ctx_.validate();
}

EnergyPoint EnergyModel::at_mu(const Vec& mu) const {
  if (mu.size() != cell_count()) throw std::invalid_argument("at_mu: size mismatch");
  for (int i = 0; i < mu.size(); ++i) {
    if (!std::isfinite(mu[i])) throw std::domain_error("at_mu: non-finite density component");
    if (mu[i] < 0.0) throw std::domain_error("at_mu: negative density component");
  }

  EnergyPoint p;
  p.mu = mu;
  const SpMat A = ctx_.K->assemble_global(mu.array() + ctx_.delta);
  p.state = std::make_shared<SpsdSolver>(A, ctx_.K->lumped_mass(), ctx_.solver, pool_);
  p.u = p.state->solve(ctx_.f);
  ctx_.K->cell_energies(p.u, p.u, p.cell_quad);
  ctx_.K->cell_energies_abs(p.u, p.cell_quad_abs);
  p.grad_e = ctx_.areas - p.cell_quad;
  p.dual = ctx_.f.dot(p.u);
  p.value = p.dual + mu.dot(ctx_.areas);
  return p;
}

EnergyPoint EnergyModel::at_sigma(const Vec& sigma) const {
  EnergyPoint p = at_mu(sigma.array().square());
  p.sigma = sigma;
  return p;
}

Vec EnergyModel::grad_F(const EnergyPoint& p) const {
  if (!p.has_sigma()) throw std::invalid_argument("grad_F: point carries no sigma");
  return 2.0 * p.sigma.cwiseProduct(p.grad_e);
}

Mat EnergyModel::hess_E_dense(const EnergyPoint& p) const {
  const int n = cell_count();
  if (n > ctx_.hess_dense_limit)
    throw CapacityError("hess_E_dense: above dense limit, use hess_F_vec");

  Mat H(n, n);
  Vec g = Vec::Zero(ctx_.K->dim());
  Vec z;
  Vec col(n);
  for (int j = 0; j < n; ++j) {
    // g = A^(j) u, supported on the six dofs of cell j
    const auto& blk = ctx_.K->block(j);
    g.setZero();
    for (int a = 0; a < 6; ++a) {
      double row = 0.0;
      for (int d = 0; d < 6; ++d) row += blk.k(a, d) * p.u[blk.dofs[static_cast<size_t>(d)]];
      g[blk.dofs[static_cast<size_t>(a)]] = row;
    }
    z = p.state->solve(g);
    ctx_.K->cell_energies(p.u, z, col);
    H.col(j) = 2.0 * col;
  }
  return H;
}

Mat EnergyModel::hess_F_dense(const EnergyPoint& p) const {
  if (!p.has_sigma()) throw std::invalid_argument("hess_F_dense: point carries no sigma");
  Mat H = hess_E_dense(p);
  const int n = cell_count();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) H(i, j) *= 4.0 * p.sigma[i] * p.sigma[j];
  H.diagonal() += 2.0 * p.grad_e;
  return H;
}

Vec EnergyModel::hess_F_vec(const EnergyPoint& p, const Vec& v) const {
  if (!p.has_sigma()) throw std::invalid_argument("hess_F_vec: point carries no sigma");
  if (v.size() != cell_count()) throw std::invalid_argument("hess_F_vec: size mismatch");

  Vec y = Vec::Zero(ctx_.K->dim());
  const Vec wts = 2.0 * p.sigma.cwiseProduct(v);
  ctx_.K->apply_weighted(wts, p.u, y);
  const Vec w = p.state->solve(y);
  Vec out(cell_count());
  ctx_.K->cell_energies(p.u, w, out);
  out = 4.0 * p.sigma.cwiseProduct(out) + 2.0 * v.cwiseProduct(p.grad_e);
  return out;
}

Vec EnergyModel::minimal_subdifferential(const EnergyPoint& p) const {
  Vec out = p.grad_e;
  for (int i = 0; i < out.size(); ++i)
    if (p.mu[i] == 0.0) out[i] = std::min(out[i], 0.0);
  return out;
}

double EnergyModel::kkt_residual(const EnergyPoint& p, double toll) const {
  if (!(toll > 0.0)) throw std::invalid_argument("kkt_residual: toll must be positive");
  double r = 0.0;
  for (int i = 0; i < p.grad_e.size(); ++i) {
    const double g = p.grad_e[i];
    const double v = p.mu[i] < toll ? std::max(0.0, -g) : std::abs(g);
    r = std::max(r, v);
  }
  return r;
}

double EnergyModel::prox_value(const EnergyPoint& p, const Vec& sigma_old, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_value: tau must be positive");
  if (!p.has_sigma()) throw std::invalid_argument("prox_value: point carries no sigma");
  return p.value + (p.sigma - sigma_old).squaredNorm() / (2.0 * tau);
}

Vec EnergyModel::prox_grad(const EnergyPoint& p, const Vec& sigma_old, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_grad: tau must be positive");
  return grad_F(p) + (p.sigma - sigma_old) / tau;
}

Vec EnergyModel::prox_hess_vec(const EnergyPoint& p, const Vec& v, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_hess_vec: tau must be positive");
  return hess_F_vec(p, v) + v / tau;
}

}  // namespace otdens
