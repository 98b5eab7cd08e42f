#include "problems.hpp"

#include <cmath>
#include <stdexcept>

namespace otdens {

RectTransportProblem RectTransportProblem::benchmark_default() {
  RectTransportProblem p;
  p.plus = {1.0 / 8.0, 1.0 / 4.0, 3.0 / 8.0, 3.0 / 4.0};
  p.minus = {5.0 / 8.0, 1.0 / 4.0, 7.0 / 8.0, 3.0 / 4.0};
  p.density = 1.0;
  return p;
}

void RectTransportProblem::validate() const {
  auto inside = [](const Rect& r) {
    return r.x0 > 0.0 && r.y0 > 0.0 && r.x1 < 1.0 && r.y1 < 1.0 && r.x1 > r.x0 && r.y1 > r.y0;
  };
  if (!inside(plus) || !inside(minus))
    throw std::invalid_argument("RectTransportProblem: rectangles must lie inside (0,1)^2");
  if (std::abs(plus.area() - minus.area()) > 1e-12)
    throw std::invalid_argument("RectTransportProblem: rectangles must have equal areas");
  const bool disjoint = plus.x1 <= minus.x0 || minus.x1 <= plus.x0 ||
                        plus.y1 <= minus.y0 || minus.y1 <= plus.y0;
  if (!disjoint) throw std::invalid_argument("RectTransportProblem: rectangles must be disjoint");
  if (!(density > 0.0)) throw std::invalid_argument("RectTransportProblem: density must be positive");
}

bool RectTransportProblem::is_translate() const {
  return std::abs((plus.x1 - plus.x0) - (minus.x1 - minus.x0)) <= 1e-12 &&
         std::abs((plus.y1 - plus.y0) - (minus.y1 - minus.y0)) <= 1e-12;
}

double exact_w1(const RectTransportProblem& problem) {
  problem.validate();
  if (!problem.is_translate())
    throw std::invalid_argument("exact_w1: closed form holds for translated rectangles only");
  const double mass = problem.density * problem.plus.area();
  const double cx = 0.5 * (problem.plus.x0 + problem.plus.x1) - 0.5 * (problem.minus.x0 + problem.minus.x1);
  const double cy = 0.5 * (problem.plus.y0 + problem.plus.y1) - 0.5 * (problem.minus.y0 + problem.minus.y1);
  return mass * std::hypot(cx, cy);
}

double exact_w1() { return exact_w1(RectTransportProblem::benchmark_default()); }

double exact_energy_optimum() { return 2.0 * exact_w1(); }

ExactSolution exact_solution() {
  return {[](double x, double y) { return exact_mu_star(x, y); }, exact_w1()};
}

double exact_mu_star(double x, double y) {
  if (y < 0.25 || y > 0.75) return 0.0;
  if (x >= 0.125 && x <= 0.375) return x - 0.125;
  if (x > 0.375 && x < 0.625) return 0.25;
  if (x >= 0.625 && x <= 0.875) return 0.875 - x;
  return 0.0;
}

Vec exact_mu_cell_averages(const TriMesh& coarse) {
  const int k = coarse.divisions_per_side;
  if (k % 8 != 0)
    throw AlignmentError("exact_mu_cell_averages: mesh must align with the support bands");

  // The density is piecewise linear in x and constant in y on each region and
  // the aligned mesh keeps every triangle inside one region, so the average
  // is the centroid value. Evaluating it as one integer ratio keeps mirrored
  // pairs bit-identical.
  Vec avg(coarse.triangle_count());
  for (int t = 0; t < coarse.triangle_count(); ++t) {
    const int cell = t / 2;
    const int lower = t % 2 == 0;
    const int ix = cell % k;
    const int iy = cell / k;
    double v = 0.0;
    if (iy >= k / 4 && iy < 3 * k / 4) {
      // centroid x = (3 ix + c) / (3 k), c = 2 for the lower triangle
      const long c = lower ? 2 : 1;
      const long num_centroid = 24L * ix + 8L * c;  // 24 k * centroid_x
      if (ix >= k / 8 && ix < 3 * k / 8)
        v = static_cast<double>(num_centroid - 3L * k) / static_cast<double>(24L * k);
      else if (ix >= 3 * k / 8 && ix < 5 * k / 8)
        v = 0.25;
      else if (ix >= 5 * k / 8 && ix < 7 * k / 8)
        v = static_cast<double>(21L * k - num_centroid) / static_cast<double>(24L * k);
    }
    avg[t] = v;
  }
  return avg;
}

ErrorReport error_report(const Vec& mu, double energy_value, const TriMesh& coarse) {
  const Vec avg = exact_mu_cell_averages(coarse);
  if (mu.size() != avg.size()) throw std::invalid_argument("error_report: size mismatch");
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const double d = mu[i] - avg[i];
    acc += coarse.areas[static_cast<size_t>(i)] * d * d;
  }
  ErrorReport rep;
  rep.l2_mu_error = std::sqrt(acc);
  rep.w1_error = std::abs(energy_value - exact_energy_optimum());
  return rep;
}

}  // namespace otdens
