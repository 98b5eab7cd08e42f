#include "mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace otdens {

double TriMesh::mesh_parameter() const {
  return std::sqrt(2.0) / static_cast<double>(divisions_per_side);
}

Point2 TriMesh::centroid(int t) const {
  const auto& tri = triangles[static_cast<size_t>(t)];
  const Point2& a = vertices[static_cast<size_t>(tri[0])];
  const Point2& b = vertices[static_cast<size_t>(tri[1])];
  const Point2& c = vertices[static_cast<size_t>(tri[2])];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

static double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

TriMesh build_unit_square_mesh(int k) {
  if (k < 1) throw std::invalid_argument("build_unit_square_mesh: divisions_per_side must be >= 1");

  TriMesh m;
  m.level = 0;
  m.divisions_per_side = k;
  m.vertices.reserve(static_cast<size_t>(k + 1) * static_cast<size_t>(k + 1));
  for (int iy = 0; iy <= k; ++iy)
    for (int ix = 0; ix <= k; ++ix)
      m.vertices.push_back({static_cast<double>(ix) / k, static_cast<double>(iy) / k});

  m.triangles.reserve(2u * static_cast<size_t>(k) * static_cast<size_t>(k));
  m.areas.reserve(m.triangles.capacity());
  for (int iy = 0; iy < k; ++iy) {
    for (int ix = 0; ix < k; ++ix) {
      const int ll = iy * (k + 1) + ix;
      const int lr = ll + 1;
      const int ul = ll + (k + 1);
      const int ur = ul + 1;
      m.triangles.push_back({ll, lr, ur});  // lower
      m.triangles.push_back({ll, ur, ul});  // upper
    }
  }
  for (const auto& tri : m.triangles) {
    const double a = signed_area(m.vertices[static_cast<size_t>(tri[0])],
                                 m.vertices[static_cast<size_t>(tri[1])],
                                 m.vertices[static_cast<size_t>(tri[2])]);
    if (a <= 0.0) throw std::logic_error("build_unit_square_mesh: non-positive triangle area");
    m.areas.push_back(a);
  }
  return m;
}

std::pair<TriMesh, RefinementMap> refine(const TriMesh& coarse) {
  const int k = coarse.divisions_per_side;
  if (k < 1 || coarse.triangle_count() != 2 * k * k)
    throw std::invalid_argument("refine: input is not a valid structured mesh");

  TriMesh fine = build_unit_square_mesh(2 * k);
  fine.level = coarse.level + 1;

  // The midpoint refinement of this mesh family coincides with the 2k
  // structured mesh, so parenthood follows from cell index arithmetic: a fine
  // cell at offset (ox, oy) inside its coarse cell lands below the coarse
  // diagonal for (1,0), above it for (0,1), and keeps its own side otherwise.
  RefinementMap rmap;
  rmap.parent_of_fine_cell.resize(static_cast<size_t>(fine.triangle_count()));
  rmap.children_of_coarse_cell.assign(static_cast<size_t>(coarse.triangle_count()),
                                      {-1, -1, -1, -1});
  std::vector<int> filled(static_cast<size_t>(coarse.triangle_count()), 0);

  for (int t = 0; t < fine.triangle_count(); ++t) {
    const int cell = t / 2;
    const int s = t % 2;
    const int cx = cell % (2 * k);
    const int cy = cell / (2 * k);
    const int ox = cx % 2;
    const int oy = cy % 2;
    int side;
    if (ox == 1 && oy == 0)
      side = 0;
    else if (ox == 0 && oy == 1)
      side = 1;
    else
      side = s;
    const int parent = 2 * ((cy / 2) * k + (cx / 2)) + side;
    rmap.parent_of_fine_cell[static_cast<size_t>(t)] = parent;
    int& n = filled[static_cast<size_t>(parent)];
    if (n >= 4) throw std::logic_error("refine: coarse cell received more than 4 children");
    rmap.children_of_coarse_cell[static_cast<size_t>(parent)][static_cast<size_t>(n++)] = t;
  }
  for (int n : filled)
    if (n != 4) throw std::logic_error("refine: coarse cell has fewer than 4 children");

  return {std::move(fine), std::move(rmap)};
}

}  // namespace otdens
