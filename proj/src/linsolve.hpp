#pragma once
// Solves for symmetric positive semidefinite operators whose kernel is the
// one-dimensional space of constants (pure Neumann stiffness matrices).
// The direct path factors a sparsity-preserving rank-one grounded
// augmentation and projects the kernel component out of the solution; the
// iterative path is conjugate gradients deflated against the constants with
// Jacobi preconditioning when a matrix is available. Both return the
// solution with zero area-weighted mean.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "errors.hpp"

namespace otdens {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Recycles symbolically analyzed Cholesky objects for one fixed sparsity
// pattern; the analysis is roughly as expensive as a numeric factorization
// on these meshes. Checked-out objects are exclusively owned until released,
// so concurrent solves at distinct operators stay safe.
class FactorPool {
 public:
  using Ldlt = Eigen::SimplicialLDLT<SpMat>;

  std::unique_ptr<Ldlt> acquire(const SpMat& pattern);
  void release(std::unique_ptr<Ldlt> solver);

 private:
  std::mutex mutex_;
  std::vector<std::unique_ptr<Ldlt>> idle_;
  Eigen::Index rows_ = 0;
  Eigen::Index nnz_ = 0;
};

struct SolverConfig {
  double rel_tol = 1e-12;
  int max_iter = 20000;
  int direct_max_dim = 100000;  // iterative above this
};

// Matrix-free contract: apply is the SPSD action, kernel_vector spans the
// kernel (constants), mean_weight carries the area weights used for the
// zero-mean normalization of solutions. A concrete matrix may be attached to
// unlock the direct path.
struct KernelAwareOperator {
  std::function<void(const Vec&, Vec&)> apply;
  Vec kernel_vector;
  Vec mean_weight;
  int dim = 0;
  const SpMat* matrix = nullptr;
};

// Reusable factorization (or CG setup) for many solves against one operator.
class SpsdSolver {
 public:
  SpsdSolver(const SpMat& A, Vec mean_weight, SolverConfig cfg = {},
             std::shared_ptr<FactorPool> pool = nullptr);
  ~SpsdSolver();
  SpsdSolver(const SpsdSolver&) = delete;
  SpsdSolver& operator=(const SpsdSolver&) = delete;

  // Zero-mean solution of A x = rhs. Throws CompatibilityError when rhs has a
  // component along the kernel, NumericalFailure when CG exhausts max_iter.
  Vec solve(const Vec& rhs) const;

  bool direct() const { return direct_; }
  int dim() const { return static_cast<int>(mean_weight_.size()); }

  // Residual norm ||A x - rhs|| for diagnosis.
  double residual(const Vec& x, const Vec& rhs) const;

 private:
  void check_compat(const Vec& rhs) const;
  Vec zero_mean(Vec x) const;

  SpMat A_;
  Vec mean_weight_;
  double weight_total_ = 1.0;
  SolverConfig cfg_;
  bool direct_ = false;
  std::shared_ptr<FactorPool> pool_;
  std::unique_ptr<FactorPool::Ldlt> ldlt_;
  Vec jacobi_inv_;
};

// One-shot solve honoring the operator contract: direct when a concrete
// matrix is attached and the dimension permits, projected CG otherwise.
Vec solve_spsd(const KernelAwareOperator& op, const Vec& rhs, double tol, int max_iter);

}  // namespace otdens
