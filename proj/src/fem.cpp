#include "fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otdens {

namespace {

// P1 element stiffness for a triangle, exact for straight edges:
// K_ab = (b_a b_b + c_a c_b) / (4 |T|).
Eigen::Matrix3d local_stiffness(const Point2& p0, const Point2& p1, const Point2& p2) {
  const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
  const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
  const double area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  Eigen::Matrix3d k;
  for (int a = 0; a < 3; ++a)
    for (int d = 0; d < 3; ++d) k(a, d) = (b[a] * b[d] + c[a] * c[d]) / (2.0 * area2);
  return k;
}

}  // namespace

CellStiffnessSet CellStiffnessSet::assemble(const TriMesh& coarse, const TriMesh& fine,
                                            const RefinementMap& rmap) {
  if (fine.divisions_per_side != 2 * coarse.divisions_per_side ||
      static_cast<int>(rmap.parent_of_fine_cell.size()) != fine.triangle_count() ||
      static_cast<int>(rmap.children_of_coarse_cell.size()) != coarse.triangle_count())
    throw std::invalid_argument("CellStiffnessSet: fine mesh is not the refinement of coarse");

  CellStiffnessSet set;
  set.dim_ = fine.vertex_count();
  set.blocks_.resize(static_cast<size_t>(coarse.triangle_count()));

  for (int i = 0; i < coarse.triangle_count(); ++i) {
    Block& blk = set.blocks_[static_cast<size_t>(i)];
    const auto& children = rmap.children_of_coarse_cell[static_cast<size_t>(i)];

    std::vector<int> dofs;
    dofs.reserve(12);
    for (int t : children)
      for (int v : fine.triangles[static_cast<size_t>(t)]) dofs.push_back(v);
    std::sort(dofs.begin(), dofs.end());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
    if (dofs.size() != 6)
      throw std::logic_error("CellStiffnessSet: coarse cell does not touch 6 fine vertices");
    for (size_t a = 0; a < 6; ++a) blk.dofs[a] = dofs[a];

    blk.k.setZero();
    for (int t : children) {
      const auto& tri = fine.triangles[static_cast<size_t>(t)];
      const Eigen::Matrix3d k = local_stiffness(fine.vertices[static_cast<size_t>(tri[0])],
                                                fine.vertices[static_cast<size_t>(tri[1])],
                                                fine.vertices[static_cast<size_t>(tri[2])]);
      int loc[3];
      for (int a = 0; a < 3; ++a)
        loc[a] = static_cast<int>(std::lower_bound(dofs.begin(), dofs.end(), tri[a]) - dofs.begin());
      for (int a = 0; a < 3; ++a)
        for (int d = 0; d < 3; ++d) blk.k(loc[a], loc[d]) += k(a, d);
    }
  }

  set.lumped_mass_ = Vec::Zero(set.dim_);
  for (int t = 0; t < fine.triangle_count(); ++t) {
    const double third = fine.areas[static_cast<size_t>(t)] / 3.0;
    for (int v : fine.triangles[static_cast<size_t>(t)])
      set.lumped_mass_[v] += third;
  }

  // Structural pattern with unit weights, then a scatter map so repeated
  // assemblies are flat value writes.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(set.blocks_.size() * 36);
  for (const Block& blk : set.blocks_)
    for (int a = 0; a < 6; ++a)
      for (int d = 0; d < 6; ++d)
        trips.emplace_back(blk.dofs[static_cast<size_t>(a)], blk.dofs[static_cast<size_t>(d)], 1.0);
  set.pattern_.resize(set.dim_, set.dim_);
  set.pattern_.setFromTriplets(trips.begin(), trips.end());
  set.pattern_.makeCompressed();

  set.scatter_.resize(set.blocks_.size());
  const auto* outer = set.pattern_.outerIndexPtr();
  const auto* inner = set.pattern_.innerIndexPtr();
  for (size_t i = 0; i < set.blocks_.size(); ++i) {
    const Block& blk = set.blocks_[i];
    for (int a = 0; a < 6; ++a) {
      for (int d = 0; d < 6; ++d) {
        const int row = blk.dofs[static_cast<size_t>(a)];
        const int col = blk.dofs[static_cast<size_t>(d)];
        const auto* beg = inner + outer[col];
        const auto* end = inner + outer[col + 1];
        const auto* it = std::lower_bound(beg, end, row);
        set.scatter_[i][static_cast<size_t>(a * 6 + d)] =
            static_cast<int>(outer[col] + (it - beg));
      }
    }
  }
  return set;
}

double CellStiffnessSet::cell_energy(int i, const Vec& u, const Vec& v) const {
  const Block& blk = blocks_[static_cast<size_t>(i)];
  double uu[6], vv[6];
  for (int a = 0; a < 6; ++a) {
    uu[a] = u[blk.dofs[static_cast<size_t>(a)]];
    vv[a] = v[blk.dofs[static_cast<size_t>(a)]];
  }
  double s = 0.0;
  for (int a = 0; a < 6; ++a) {
    double row = 0.0;
    for (int d = 0; d < 6; ++d) row += blk.k(a, d) * vv[d];
    s += uu[a] * row;
  }
  return s;
}

void CellStiffnessSet::cell_energies(const Vec& u, const Vec& v, Vec& out) const {
  out.resize(cell_count());
  for (int i = 0; i < cell_count(); ++i) out[i] = cell_energy(i, u, v);
}

void CellStiffnessSet::cell_energies_abs(const Vec& u, Vec& out) const {
  out.resize(cell_count());
  for (int i = 0; i < cell_count(); ++i) {
    const Block& blk = blocks_[static_cast<size_t>(i)];
    double uu[6];
    for (int a = 0; a < 6; ++a) uu[a] = std::abs(u[blk.dofs[static_cast<size_t>(a)]]);
    double s = 0.0;
    for (int a = 0; a < 6; ++a) {
      double row = 0.0;
      for (int d = 0; d < 6; ++d) row += std::abs(blk.k(a, d)) * uu[d];
      s += uu[a] * row;
    }
    out[i] = s;
  }
}

void CellStiffnessSet::apply_weighted(const Vec& w, const Vec& x, Vec& y) const {
  if (w.size() != cell_count() || x.size() != dim_)
    throw std::invalid_argument("apply_weighted: dimension mismatch");
  if (y.size() != dim_) y = Vec::Zero(dim_);
  for (int i = 0; i < cell_count(); ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    const Block& blk = blocks_[static_cast<size_t>(i)];
    double xx[6];
    for (int a = 0; a < 6; ++a) xx[a] = x[blk.dofs[static_cast<size_t>(a)]];
    for (int a = 0; a < 6; ++a) {
      double row = 0.0;
      for (int d = 0; d < 6; ++d) row += blk.k(a, d) * xx[d];
      y[blk.dofs[static_cast<size_t>(a)]] += wi * row;
    }
  }
}

SpMat CellStiffnessSet::assemble_global(const Vec& w) const {
  if (w.size() != cell_count())
    throw std::invalid_argument("assemble_global: weight count != cell count");
  SpMat A = pattern_;
  double* vals = A.valuePtr();
  std::fill(vals, vals + A.nonZeros(), 0.0);
  for (int i = 0; i < cell_count(); ++i) {
    const double wi = w[i];
    const Block& blk = blocks_[static_cast<size_t>(i)];
    const auto& sc = scatter_[static_cast<size_t>(i)];
    for (int e = 0; e < 36; ++e) vals[sc[static_cast<size_t>(e)]] += wi * blk.k(e / 6, e % 6);
  }
  return A;
}

namespace {

void check_aligned(const Rect& r, int k, const char* name) {
  auto on_grid = [k](double v) {
    const double scaled = v * k;
    return std::abs(scaled - std::round(scaled)) <= 1e-9 && v >= -1e-12 && v <= 1.0 + 1e-12;
  };
  if (!(r.x1 > r.x0 && r.y1 > r.y0))
    throw std::invalid_argument(std::string("assemble_load: degenerate rectangle ") + name);
  if (!on_grid(r.x0) || !on_grid(r.x1) || !on_grid(r.y0) || !on_grid(r.y1))
    throw AlignmentError(std::string("assemble_load: rectangle ") + name +
                         " is not aligned with the fine mesh");
}

}  // namespace

Vec assemble_load(const Rect& f_plus, const Rect& f_minus, const TriMesh& fine, double density) {
  check_aligned(f_plus, fine.divisions_per_side, "f_plus");
  check_aligned(f_minus, fine.divisions_per_side, "f_minus");
  if (std::abs(f_plus.area() - f_minus.area()) > 1e-12)
    throw std::invalid_argument("assemble_load: rectangles must have equal areas");

  Vec f = Vec::Zero(fine.vertex_count());
  for (int t = 0; t < fine.triangle_count(); ++t) {
    const Point2 c = fine.centroid(t);
    double val = 0.0;
    if (f_plus.contains(c.x, c.y)) val += density;
    if (f_minus.contains(c.x, c.y)) val -= density;
    if (val == 0.0) continue;
    const double contrib = val * fine.areas[static_cast<size_t>(t)] / 3.0;
    for (int v : fine.triangles[static_cast<size_t>(t)]) f[v] += contrib;
  }
  return f;
}

Vec assemble_load_p0(const Vec& cell_values, const TriMesh& fine) {
  if (cell_values.size() != fine.triangle_count())
    throw std::invalid_argument("assemble_load_p0: one value per fine triangle required");
  Vec f = Vec::Zero(fine.vertex_count());
  for (int t = 0; t < fine.triangle_count(); ++t) {
    const double contrib = cell_values[t] * fine.areas[static_cast<size_t>(t)] / 3.0;
    if (contrib == 0.0) continue;
    for (int v : fine.triangles[static_cast<size_t>(t)]) f[v] += contrib;
  }
  return f;
}

StateSolution solve_state(const Vec& mu, double delta, const CellStiffnessSet& K,
                          const Vec& f, const SolverConfig& cfg) {
  if (mu.size() != K.cell_count()) throw std::invalid_argument("solve_state: mu size mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("solve_state: delta must be positive");
  if (f.size() != K.dim()) throw std::invalid_argument("solve_state: load size mismatch");
  for (int i = 0; i < mu.size(); ++i)
    if (mu[i] < 0.0) throw std::domain_error("solve_state: negative density component");

  const SpMat A = K.assemble_global(mu.array() + delta);
  SpsdSolver solver(A, K.lumped_mass(), cfg);
  StateSolution out;
  out.u = solver.solve(f);
  out.mean = K.lumped_mass().dot(out.u) / K.lumped_mass().sum();
  out.residual = solver.residual(out.u, f);
  const double bound = cfg.rel_tol * std::max(1.0, f.norm()) * 1e3;
  if (out.residual > std::max(bound, 1e-11))
    throw NumericalFailure("solve_state: residual above tolerance", out.residual);
  return out;
}

}  // namespace otdens
