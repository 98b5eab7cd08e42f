#include "diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

namespace otdens {

namespace {

struct RitzEstimate {
  double value = 0.0;
  double residual = 0.0;
};

// Lanczos with full reorthogonalization; returns the largest Ritz value and
// its residual bound.
RitzEstimate lanczos_largest(const std::function<Vec(const Vec&)>& op, int n, int m) {
  m = std::min(m, n);
  std::vector<Vec> basis;
  basis.reserve(static_cast<size_t>(m));
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(3.7 * i + 0.3);
  v /= v.norm();

  Vec alpha = Vec::Zero(m), beta = Vec::Zero(m);
  basis.push_back(v);
  Vec w;
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    w = op(basis[static_cast<size_t>(j)]);
    alpha[j] = basis[static_cast<size_t>(j)].dot(w);
    w -= alpha[j] * basis[static_cast<size_t>(j)];
    if (j > 0) w -= beta[j - 1] * basis[static_cast<size_t>(j - 1)];
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : basis) w -= q.dot(w) * q;
    steps = j + 1;
    const double nb = w.norm();
    if (j + 1 < m) {
      if (nb < 1e-14) break;  // invariant subspace found
      beta[j] = nb;
      basis.push_back(w / nb);
    } else {
      beta[j] = nb;
    }
  }

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
  for (int j = 0; j < steps; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  int imax = 0;
  es.eigenvalues().maxCoeff(&imax);
  RitzEstimate est;
  est.value = es.eigenvalues()[imax];
  est.residual = std::abs(beta[steps - 1] * es.eigenvectors()(steps - 1, imax));
  return est;
}

}  // namespace

SpectrumReport hess_F_extremal_eigs(const EnergyModel& model, const Vec& sigma_star,
                                    int level) {
  const EnergyPoint p = model.at_sigma(sigma_star);
  const int n = model.cell_count();

  SpectrumReport rep;
  rep.level = level;
  rep.delta = model.context().delta;

  if (n <= model.context().hess_dense_limit) {
    const Mat H = model.hess_F_dense(p);
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    rep.lambda_min = es.eigenvalues().minCoeff();
    rep.lambda_max = es.eigenvalues().maxCoeff();
    rep.method = SpectrumReport::Method::dense;
    return rep;
  }

  auto apply = [&](const Vec& v) { return model.hess_F_vec(p, v); };
  const RitzEstimate top = lanczos_largest(apply, n, 50);

  // Second pass on the reflected operator so the smallest eigenvalue becomes
  // the dominant one.
  const double shift = top.value * 1.05 + 1e-12;
  auto reflected = [&](const Vec& v) { return Vec(shift * v - model.hess_F_vec(p, v)); };
  const RitzEstimate bottom = lanczos_largest(reflected, n, 50);

  rep.lambda_max = top.value;
  rep.lambda_min = shift - bottom.value;
  rep.method = SpectrumReport::Method::iterative;
  const double scale = std::max(std::abs(top.value), 1e-300);
  rep.converged = top.residual <= 1e-6 * scale && bottom.residual <= 1e-6 * scale;
  return rep;
}

double condition_estimate(const EnergyModel& model, const Vec& sigma, double Lambda,
                          double active_toll) {
  if (!(Lambda > 0.0)) throw std::invalid_argument("condition_estimate: Lambda must be positive");
  const EnergyPoint p = model.at_sigma(sigma);
  double m = 0.0;
  for (int i = 0; i < sigma.size(); ++i)
    if (p.mu[i] >= active_toll) m = std::max(m, std::abs(p.grad_e[i]));
  return 16.0 / Lambda * m;
}

}  // namespace otdens
