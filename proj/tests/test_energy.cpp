#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "energy.hpp"
#include "problems.hpp"

using namespace otdens;

namespace {

struct Ctx {
  TriMesh coarse, fine;
  RefinementMap rmap;
  std::shared_ptr<CellStiffnessSet> K;
  EnergyModel model;
};

Ctx make_ctx(int k, double delta, bool zero_load = false) {
  TriMesh coarse = build_unit_square_mesh(k);
  auto [fine, rmap] = refine(coarse);
  auto K = std::make_shared<CellStiffnessSet>(CellStiffnessSet::assemble(coarse, fine, rmap));
  EnergyContext ctx;
  ctx.K = K;
  if (zero_load) {
    ctx.f = Vec::Zero(K->dim());
  } else {
    const RectTransportProblem p = RectTransportProblem::benchmark_default();
    ctx.f = assemble_load(p.plus, p.minus, fine);
  }
  ctx.areas = Eigen::Map<const Vec>(coarse.areas.data(),
                                    static_cast<Eigen::Index>(coarse.areas.size()));
  ctx.delta = delta;
  return Ctx{std::move(coarse), std::move(fine), std::move(rmap), std::move(K),
             EnergyModel(std::move(ctx))};
}

Vec random_feasible_mu(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Vec mu(n);
  for (int i = 0; i < n; ++i) mu[i] = dist(rng);
  return mu;
}

Vec random_sigma(int n, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 0.6);
  Vec s(n);
  for (int i = 0; i < n; ++i) s[i] = dist(rng) + 0.5;
  return s;
}

}  // namespace

TEST_CASE("energy value: zero load and zero density") {
  const Ctx z = make_ctx(8, 0.03125, /*zero_load=*/true);
  const int n = z.model.cell_count();
  std::mt19937 rng(1);
  const Vec mu = random_feasible_mu(n, rng);
  CHECK(z.model.energy(mu) ==
        doctest::Approx(mu.dot(z.model.context().areas)).epsilon(1e-13));

  const Ctx c = make_ctx(8, 0.03125);
  CHECK(c.model.energy(Vec::Zero(n)) > 0.0);
}

TEST_CASE("gradient of E against central finite differences") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  std::mt19937 rng(42);
  const double h = 1e-5;
  for (int trial = 0; trial < 3; ++trial) {
    const Vec mu = random_feasible_mu(n, rng);
    const Vec g = c.model.grad_E(mu);
    const double scale = g.cwiseAbs().maxCoeff();
    // probe a deterministic subset of coordinates
    for (int i = 0; i < n; i += 17) {
      Vec mp = mu, mm = mu;
      mp[i] += h;
      mm[i] -= h;
      const double fd = (c.model.energy(mp) - c.model.energy(mm)) / (2.0 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("gradient of F: chain rule construction and finite differences") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  std::mt19937 rng(43);
  const Vec sigma = random_sigma(n, rng);

  // exact same floating-point construction as 2 sigma .* grad_E(sigma^2)
  const EnergyPoint p = c.model.at_sigma(sigma);
  const Vec gF = c.model.grad_F(p);
  const Vec gE = c.model.grad_E(sigma.array().square());
  for (int i = 0; i < n; ++i) CHECK(gF[i] == 2.0 * sigma[i] * gE[i]);

  const double h = 1e-5;
  const double scale = gF.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; i += 29) {
    Vec sp = sigma, sm = sigma;
    sp[i] += h;
    sm[i] -= h;
    const double fd =
        (c.model.at_sigma(sp).value - c.model.at_sigma(sm).value) / (2.0 * h);
    CHECK(std::abs(fd - gF[i]) <= 1e-5 * scale);
  }

  // sigma = 0 kills the gradient
  CHECK(c.model.grad_F(Vec::Zero(n)).norm() == 0.0);

  // zero load: component 2 sigma_i |T_i|
  const Ctx z = make_ctx(8, 0.03125, true);
  const Vec gz = z.model.grad_F(sigma);
  for (int i = 0; i < n; ++i)
    CHECK(gz[i] == doctest::Approx(2.0 * sigma[i] * z.model.context().areas[i]).epsilon(1e-13));
}

TEST_CASE("zero-load gradient equals the area vector") {
  const Ctx z = make_ctx(8, 0.03125, true);
  std::mt19937 rng(5);
  const Vec mu = random_feasible_mu(z.model.cell_count(), rng);
  const Vec g = z.model.grad_E(mu);
  CHECK((g - z.model.context().areas).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dense Hessian of E: symmetry and positive semidefiniteness") {
  const Ctx c = make_ctx(8, 0.03125);
  std::mt19937 rng(44);
  const Vec mu = random_feasible_mu(c.model.cell_count(), rng);
  const EnergyPoint p = c.model.at_mu(mu);
  const Mat H = c.model.hess_E_dense(p);
  CHECK((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);

  const Ctx z = make_ctx(8, 0.03125, true);
  const EnergyPoint pz = z.model.at_mu(mu);
  CHECK(z.model.hess_E_dense(pz).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dense Hessian capacity limit") {
  Ctx c = make_ctx(8, 0.03125);
  EnergyContext small = c.model.context();
  small.hess_dense_limit = 16;
  const EnergyModel m(small);
  std::mt19937 rng(2);
  const EnergyPoint p = m.at_mu(random_feasible_mu(m.cell_count(), rng));
  CHECK_THROWS_AS((void)m.hess_E_dense(p), CapacityError);
  // the matrix-free product stays available
  CHECK(m.hess_F_vec(m.at_sigma(Vec::Ones(m.cell_count())), Vec::Ones(m.cell_count())).size() ==
        m.cell_count());
}

TEST_CASE("Hessian-vector product against the dense Hessian") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  std::mt19937 rng(45);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec sigma = random_sigma(n, rng);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    const EnergyPoint p = c.model.at_sigma(sigma);
    const Vec hv = c.model.hess_F_vec(p, v);
    const Vec ref = c.model.hess_F_dense(p) * v;
    CHECK((hv - ref).norm() <= 1e-9 * std::max(1.0, ref.norm()));
  }

  // v = 0 -> 0
  const Vec sigma = random_sigma(n, rng);
  CHECK(c.model.hess_F_vec(sigma, Vec::Zero(n)).norm() == 0.0);

  // zero load: Hess F = 2 diag(areas)
  const Ctx z = make_ctx(8, 0.03125, true);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  const Vec hz = z.model.hess_F_vec(z.model.at_sigma(sigma), v);
  for (int i = 0; i < n; ++i)
    CHECK(hz[i] == doctest::Approx(2.0 * v[i] * z.model.context().areas[i]).epsilon(1e-13));
}

TEST_CASE("Hessian-vector product is a symmetric bilinear form") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  std::mt19937 rng(46);
  std::normal_distribution<double> dist;
  const EnergyPoint p = c.model.at_sigma(random_sigma(n, rng));
  for (int trial = 0; trial < 10; ++trial) {
    Vec v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = dist(rng);
      w[i] = dist(rng);
    }
    const double vw = v.dot(c.model.hess_F_vec(p, w));
    const double wv = w.dot(c.model.hess_F_vec(p, v));
    CHECK(std::abs(vw - wv) <= 1e-9 * std::max(1.0, std::abs(vw)));
  }
}

TEST_CASE("minimal-norm subdifferential") {
  const Ctx z = make_ctx(8, 0.03125, true);
  const int n = z.model.cell_count();
  // zero load, mu = 0: the origin minimizes, the subdifferential vanishes
  CHECK(z.model.minimal_subdifferential(Vec::Zero(n)).norm() == 0.0);

  // interior mu: equals the gradient exactly
  const Ctx c = make_ctx(8, 0.03125);
  std::mt19937 rng(47);
  Vec mu = random_feasible_mu(n, rng);
  mu.array() += 0.1;
  const EnergyPoint p = c.model.at_mu(mu);
  CHECK((c.model.minimal_subdifferential(p) - p.grad_e).norm() == 0.0);

  // boundary components take the negative part
  Vec mub = mu;
  mub[5] = 0.0;
  const EnergyPoint pb = c.model.at_mu(mub);
  const Vec sub = c.model.minimal_subdifferential(pb);
  CHECK(sub[5] == std::min(pb.grad_e[5], 0.0));
}

TEST_CASE("KKT residual branches") {
  const Ctx z = make_ctx(8, 0.03125, true);
  const int n = z.model.cell_count();
  CHECK(z.model.kkt_residual(Vec::Zero(n), 1e-8) == 0.0);

  const Ctx c = make_ctx(8, 0.03125);
  std::mt19937 rng(48);
  Vec mu = random_feasible_mu(n, rng);
  mu.array() += 2e-8;  // every component at or above toll
  const EnergyPoint p = c.model.at_mu(mu);
  CHECK(c.model.kkt_residual(p, 1e-8) ==
        doctest::Approx(p.grad_e.cwiseAbs().maxCoeff()).epsilon(1e-14));
  CHECK_THROWS_AS(c.model.kkt_residual(p, 0.0), std::invalid_argument);
}

TEST_CASE("proximal objective and its derivatives") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  std::mt19937 rng(49);
  const Vec sigma_old = random_sigma(n, rng);
  const EnergyPoint p_old = c.model.at_sigma(sigma_old);

  // sigma = sigma_old: G = F, grad G = grad F
  CHECK(c.model.prox_value(p_old, sigma_old, 0.7) == doctest::Approx(p_old.value));
  CHECK((c.model.prox_grad(p_old, sigma_old, 0.7) - c.model.grad_F(p_old)).norm() == 0.0);

  // huge tau: the proximal term vanishes
  Vec sigma = sigma_old;
  sigma[3] += 0.25;
  const EnergyPoint p = c.model.at_sigma(sigma);
  CHECK((c.model.prox_grad(p, sigma_old, 1e12) - c.model.grad_F(p)).cwiseAbs().maxCoeff() <=
        1e-8);

  // zero load: the step minimizer is sigma_old / (1 + 2 tau |T_i|)
  const Ctx z = make_ctx(8, 0.03125, true);
  const double tau = 0.9;
  Vec closed(n);
  for (int i = 0; i < n; ++i)
    closed[i] = sigma_old[i] / (1.0 + 2.0 * tau * z.model.context().areas[i]);
  const EnergyPoint pc = z.model.at_sigma(closed);
  CHECK(z.model.prox_grad(pc, sigma_old, tau).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("convexity of E along segments") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  std::mt19937 rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec a = random_feasible_mu(n, rng);
    const Vec b = random_feasible_mu(n, rng);
    const double ea = c.model.energy(a);
    const double eb = c.model.energy(b);
    for (double t : {0.25, 0.5, 0.75}) {
      const double emid = c.model.energy((1.0 - t) * a + t * b);
      CHECK(emid <= (1.0 - t) * ea + t * eb + 1e-10);
    }
  }
}

TEST_CASE("duality identity at the state solution") {
  const Ctx c = make_ctx(8, 0.03125);
  std::mt19937 rng(51);
  const Vec mu = random_feasible_mu(c.model.cell_count(), rng);
  const EnergyPoint p = c.model.at_mu(mu);
  // f.u = u.A(mu).u, i.e. the dual value is attained
  const double uAu = p.cell_quad.dot(Vec(mu.array() + c.model.context().delta));
  CHECK(std::abs(p.dual - uAu) <= 1e-10 * std::max(1.0, std::abs(p.dual)));
}

TEST_CASE("feasibility violations are rejected") {
  const Ctx c = make_ctx(8, 0.03125);
  const int n = c.model.cell_count();
  Vec mu = Vec::Ones(n);
  mu[0] = -1e-12;
  CHECK_THROWS_AS(c.model.at_mu(mu), std::domain_error);
  mu[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(c.model.at_mu(mu), std::domain_error);
}
