#pragma once
// P1 finite element machinery on the coarse/fine mesh pair: per-coarse-cell
// stiffness blocks, mu-weighted global assembly with a cached sparsity
// pattern, exact load vectors for difference-of-rectangles forcing, and the
// regularized Neumann state solve with the zero-mean constraint.

#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "linsolve.hpp"
#include "mesh.hpp"

namespace otdens {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double area() const { return (x1 - x0) * (y1 - y0); }
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

// The blocks A^(i): restriction of the fine-mesh P1 stiffness matrix to the
// four fine triangles inside coarse cell i. Each block touches exactly six
// fine vertices, so it is stored as a dense 6x6 with a global index map.
class CellStiffnessSet {
 public:
  struct Block {
    std::array<int, 6> dofs;
    Eigen::Matrix<double, 6, 6> k;
  };

  static CellStiffnessSet assemble(const TriMesh& coarse, const TriMesh& fine,
                                   const RefinementMap& rmap);

  int cell_count() const { return static_cast<int>(blocks_.size()); }
  int dim() const { return dim_; }
  const Block& block(int i) const { return blocks_[static_cast<size_t>(i)]; }

  // u^T A^(i) v
  double cell_energy(int i, const Vec& u, const Vec& v) const;
  // all cells at once: out_i = u^T A^(i) v
  void cell_energies(const Vec& u, const Vec& v, Vec& out) const;
  // sum of |k_ab u_a u_b| per cell: the pre-cancellation magnitude of the
  // quadratic form, used as a rounding-floor scale
  void cell_energies_abs(const Vec& u, Vec& out) const;

  // y += sum_i w_i A^(i) x
  void apply_weighted(const Vec& cell_weights, const Vec& x, Vec& y) const;

  // sum_i w_i A^(i) as a sparse matrix over the cached pattern
  SpMat assemble_global(const Vec& cell_weights) const;

  // Lumped P1 mass of the fine mesh, w_p = integral of the hat function.
  const Vec& lumped_mass() const { return lumped_mass_; }

 private:
  std::vector<Block> blocks_;
  int dim_ = 0;
  Vec lumped_mass_;
  SpMat pattern_;                              // structural copy, values unused
  std::vector<std::array<int, 36>> scatter_;   // block entry -> value slot
};

// Load vector for f = density * (chi(R+) - chi(R-)) integrated exactly
// against fine-mesh hat functions. Rectangles must be edge-aligned and of
// equal area; misalignment raises AlignmentError.
Vec assemble_load(const Rect& f_plus, const Rect& f_minus, const TriMesh& fine,
                  double density = 1.0);

// General forcing as P0 data on the fine mesh, one value per triangle; the
// rectangle loads are the indicator-valued special case.
Vec assemble_load_p0(const Vec& cell_values, const TriMesh& fine);

struct StateSolution {
  Vec u;
  double mean = 0.0;      // area-weighted mean after projection
  double residual = 0.0;  // ||A(mu) u - f||
};

// Solves (sum_i (mu_i + delta) A^(i)) u = f on the zero-mean subspace.
StateSolution solve_state(const Vec& mu, double delta, const CellStiffnessSet& K,
                          const Vec& f, const SolverConfig& cfg = {});

}  // namespace otdens
