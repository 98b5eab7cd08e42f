#pragma once
// The discrete transport energy E over per-cell densities, its square-root
// reparametrization F, and the proximal objective G used by the implicit
// flows: values, gradients, dense Hessians, Hessian-vector products, the
// minimal-norm subdifferential, and the thresholded KKT residual.
//
// Convention: E(mu) = f.u(mu) + sum_i mu_i |T_i| with the state solving
// (sum_i (mu_i + delta) A^(i)) u = f, so dE/dmu_i = |T_i| - u.A^(i).u.

#include <Eigen/Dense>
#include <memory>

#include "fem.hpp"

namespace otdens {

using Mat = Eigen::MatrixXd;

struct DensityField {
  Vec mu;
  int level = 0;
};

struct SigmaField {
  Vec sigma;
  Vec square() const { return sigma.array().square(); }
};

struct EnergyContext {
  std::shared_ptr<const CellStiffnessSet> K;
  Vec f;               // fine-mesh load
  Vec areas;           // coarse cell areas m_n
  double delta = 0.0;  // relaxation, strictly positive
  SolverConfig solver;
  int hess_dense_limit = 4096;

  void validate() const;
};

// Everything tied to one evaluation of the state equation at a fixed mu.
// The factorization is kept so Hessian actions reuse it.
struct EnergyPoint {
  Vec mu;
  Vec sigma;  // empty when the point was built from mu directly
  Vec u;
  std::shared_ptr<const SpsdSolver> state;
  Vec cell_quad;      // e_i = u.A^(i).u
  Vec cell_quad_abs;  // sum |k_ab u_a u_b|, rounding scale of e_i
  Vec grad_e;         // |T_i| - e_i
  double dual = 0.0;   // f.u
  double value = 0.0;  // E(mu)

  bool has_sigma() const { return sigma.size() > 0; }
};

class EnergyModel {
 public:
  explicit EnergyModel(EnergyContext ctx);

  const EnergyContext& context() const { return ctx_; }
  int cell_count() const { return static_cast<int>(ctx_.areas.size()); }

  EnergyPoint at_mu(const Vec& mu) const;
  EnergyPoint at_sigma(const Vec& sigma) const;

  double energy(const Vec& mu) const { return at_mu(mu).value; }
  Vec grad_E(const Vec& mu) const { return at_mu(mu).grad_e; }
  Vec grad_F(const Vec& sigma) const { return grad_F(at_sigma(sigma)); }
  Vec grad_F(const EnergyPoint& p) const;

  // dense d2E/dmu_i dmu_j = 2 u.A^(i) A(mu)^-1 A^(j).u; CapacityError above
  // the dense limit.
  Mat hess_E_dense(const EnergyPoint& p) const;
  // Hess F = 4 sigma sigma^T (.) Hess E + 2 diag(grad E)
  Mat hess_F_dense(const EnergyPoint& p) const;
  Vec hess_F_vec(const EnergyPoint& p, const Vec& v) const;
  Vec hess_F_vec(const Vec& sigma, const Vec& v) const {
    return hess_F_vec(at_sigma(sigma), v);
  }

  Vec minimal_subdifferential(const Vec& mu) const {
    return minimal_subdifferential(at_mu(mu));
  }
  Vec minimal_subdifferential(const EnergyPoint& p) const;

  double kkt_residual(const Vec& mu, double toll) const {
    return kkt_residual(at_mu(mu), toll);
  }
  double kkt_residual(const EnergyPoint& p, double toll) const;

  // Proximal objective G(sigma; sigma_old, tau) = F(sigma) + |sigma-old|^2/(2 tau)
  double prox_value(const EnergyPoint& p, const Vec& sigma_old, double tau) const;
  Vec prox_grad(const EnergyPoint& p, const Vec& sigma_old, double tau) const;
  Vec prox_hess_vec(const EnergyPoint& p, const Vec& v, double tau) const;

 private:
  EnergyContext ctx_;
  std::shared_ptr<FactorPool> pool_;
};

}  // namespace otdens
