#pragma once
// Structured triangulations of the unit square with a uniform refinement
// hierarchy. Vertices sit on a (k+1)x(k+1) lattice in row-major order and
// every grid cell is split along its lower-left to upper-right diagonal,
// lower triangle first, so all orderings are deterministic. Meshes are
// immutable after construction.

#include <array>
#include <utility>
#include <vector>

namespace otdens {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct TriMesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise vertex ids
  std::vector<double> areas;
  int level = 0;
  int divisions_per_side = 0;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  // Longest edge of any triangle, sqrt(2)/k for this family.
  double mesh_parameter() const;

  Point2 centroid(int triangle) const;

  static constexpr const char* diagonal_orientation = "lower-left-to-upper-right";
};

struct RefinementMap {
  std::vector<int> parent_of_fine_cell;
  std::vector<std::array<int, 4>> children_of_coarse_cell;
};

// k x k square cells, each split into two triangles; throws
// std::invalid_argument for k < 1.
TriMesh build_unit_square_mesh(int divisions_per_side);

// Uniform refinement by edge midpoints: each triangle splits into four, the
// result has divisions 2k and level incremented by one.
std::pair<TriMesh, RefinementMap> refine(const TriMesh& coarse);

}  // namespace otdens
