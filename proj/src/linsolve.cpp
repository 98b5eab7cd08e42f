#include "linsolve.hpp"

#include <cmath>

namespace otdens {

namespace {

constexpr double kCompatTol = 1e-10;

// CG on the orthogonal complement of the constants. precond may be empty.
Vec projected_cg(const std::function<void(const Vec&, Vec&)>& apply, const Vec& rhs,
                 const Vec& precond_inv, double rel_tol, int max_iter) {
  const auto n = rhs.size();
  const double nf = rhs.norm();
  Vec x = Vec::Zero(n);
  if (nf == 0.0) return x;

  auto deflate = [n](Vec& v) { v.array() -= v.sum() / static_cast<double>(n); };

  Vec r = rhs;
  deflate(r);
  Vec z = precond_inv.size() ? Vec(precond_inv.cwiseProduct(r)) : r;
  deflate(z);
  Vec p = z;
  Vec Ap(n);
  double rz = r.dot(z);
  const double stop = rel_tol * nf;

  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= stop) return x;
    apply(p, Ap);
    deflate(Ap);
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) {
      // Semidefinite breakdown: the current iterate is the best available.
      return x;
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = precond_inv.size() ? Vec(precond_inv.cwiseProduct(r)) : r;
    deflate(z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (r.norm() > stop)
    throw NumericalFailure("projected CG exhausted max_iter", r.norm());
  return x;
}

}  // namespace

std::unique_ptr<FactorPool::Ldlt> FactorPool::acquire(const SpMat& pattern) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (rows_ == 0) {
      rows_ = pattern.rows();
      nnz_ = pattern.nonZeros();
    }
    if (pattern.rows() != rows_ || pattern.nonZeros() != nnz_)
      throw std::invalid_argument("FactorPool: pattern does not match this pool");
    if (!idle_.empty()) {
      auto solver = std::move(idle_.back());
      idle_.pop_back();
      return solver;
    }
  }
  auto solver = std::make_unique<Ldlt>();
  solver->analyzePattern(pattern);
  return solver;
}

void FactorPool::release(std::unique_ptr<Ldlt> solver) {
  if (!solver) return;
  std::lock_guard<std::mutex> lock(mutex_);
  idle_.push_back(std::move(solver));
}

SpsdSolver::SpsdSolver(const SpMat& A, Vec mean_weight, SolverConfig cfg,
                       std::shared_ptr<FactorPool> pool)
    : A_(A), mean_weight_(std::move(mean_weight)), cfg_(cfg), pool_(std::move(pool)) {
  if (A_.rows() != A_.cols() || A_.rows() != mean_weight_.size())
    throw std::invalid_argument("SpsdSolver: dimension mismatch");
  weight_total_ = mean_weight_.sum();
  direct_ = A_.rows() <= cfg_.direct_max_dim;
  if (direct_) {
    // Ground one entry: (A + c e0 e0^T) y = rhs has the exact solution of the
    // singular system with y_0 = 0 whenever rhs is compatible.
    SpMat G = A_;
    const double c = G.diagonal().sum() / static_cast<double>(G.rows());
    G.coeffRef(0, 0) += c;
    if (pool_) {
      ldlt_ = pool_->acquire(G);
      ldlt_->factorize(G);
    } else {
      ldlt_ = std::make_unique<FactorPool::Ldlt>();
      ldlt_->compute(G);
    }
    if (ldlt_->info() != Eigen::Success)
      throw NumericalFailure("SpsdSolver: factorization failed", 0.0);
  } else {
    jacobi_inv_ = A_.diagonal().cwiseMax(1e-300).cwiseInverse();
  }
}

SpsdSolver::~SpsdSolver() {
  if (pool_) pool_->release(std::move(ldlt_));
}

void SpsdSolver::check_compat(const Vec& rhs) const {
  const double s = rhs.sum();
  if (std::abs(s) > kCompatTol * std::max(1.0, rhs.template lpNorm<1>()))
    throw CompatibilityError("rhs has a component along the constants kernel");
}

Vec SpsdSolver::zero_mean(Vec x) const {
  x.array() -= mean_weight_.dot(x) / weight_total_;
  return x;
}

Vec SpsdSolver::solve(const Vec& rhs) const {
  check_compat(rhs);
  if (direct_) {
    Vec b = rhs;
    b.array() -= b.sum() / static_cast<double>(b.size());
    Vec y = ldlt_->solve(b);
    // One refinement pass; the factorization is backward stable but the
    // operator can be ill-conditioned at small delta.
    Vec r = b - A_ * y;
    y += ldlt_->solve(r);
    return zero_mean(std::move(y));
  }
  auto apply = [this](const Vec& v, Vec& out) { out.noalias() = A_ * v; };
  Vec x = projected_cg(apply, rhs, jacobi_inv_, cfg_.rel_tol, cfg_.max_iter);
  return zero_mean(std::move(x));
}

double SpsdSolver::residual(const Vec& x, const Vec& rhs) const {
  return (A_ * x - rhs).norm();
}

Vec solve_spsd(const KernelAwareOperator& op, const Vec& rhs, double tol, int max_iter) {
  if (op.dim <= 0 || rhs.size() != op.dim)
    throw std::invalid_argument("solve_spsd: dimension mismatch");
  const double s = rhs.sum();
  if (std::abs(s) > kCompatTol * std::max(1.0, rhs.template lpNorm<1>()))
    throw CompatibilityError("solve_spsd: incompatible rhs");

  if (op.matrix != nullptr && op.dim <= SolverConfig{}.direct_max_dim) {
    SolverConfig cfg;
    cfg.rel_tol = tol;
    cfg.max_iter = max_iter;
    Vec w = op.mean_weight.size() ? op.mean_weight : Vec::Ones(op.dim);
    return SpsdSolver(*op.matrix, std::move(w), cfg).solve(rhs);
  }

  Vec x = projected_cg(op.apply, rhs, Vec(), tol, max_iter);
  Vec w = op.mean_weight.size() ? op.mean_weight : Vec::Ones(op.dim);
  x.array() -= w.dot(x) / w.sum();
  return x;
}

}  // namespace otdens
