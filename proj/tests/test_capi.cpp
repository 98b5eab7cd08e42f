#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "otdens.h"

extern "C" const char* capi_header_version_from_c(void);

namespace {

std::filesystem::path tmpdir() {
  auto dir = std::filesystem::temp_directory_path() / "otdens_capi_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::strcmp(otdens_version(), "0.1.0") == 0);
  CHECK(std::strcmp(capi_header_version_from_c(), "0.1.0") == 0);
  CHECK(std::string(otdens_status_string(OTDENS_OK)) == "ok");
  CHECK(std::string(otdens_status_string(OTDENS_ERR_ALIGNMENT)) == "alignment error");
}

TEST_CASE("problem creation and validation errors") {
  otdens_problem* p = nullptr;
  CHECK(otdens_problem_create(0, "h2", &p) == OTDENS_OK);
  REQUIRE(p != nullptr);
  CHECK(otdens_problem_cell_count(p) == 128);
  CHECK(otdens_problem_mesh_h(p) == doctest::Approx(0.176776695).epsilon(1e-8));
  CHECK(otdens_problem_delta(p) == doctest::Approx(0.03125).epsilon(1e-12));
  otdens_problem_destroy(p);

  p = nullptr;
  CHECK(otdens_problem_create(0, "h3", &p) == OTDENS_ERR_INVALID_ARGUMENT);
  CHECK(p == nullptr);
  CHECK(std::string(otdens_last_error()).find("h3") != std::string::npos);
  CHECK(otdens_problem_create(-1, "h", &p) == OTDENS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("solve, trace access, writers") {
  otdens_problem* p = nullptr;
  REQUIRE(otdens_problem_create(0, "h2", &p) == OTDENS_OK);

  otdens_flow_config cfg;
  otdens_flow_config_default(&cfg);
  CHECK(cfg.tau0 == 1.0);
  CHECK(cfg.alpha > 1.0);

  otdens_result* r = nullptr;
  REQUIRE(otdens_solve(p, "alg3", &cfg, &r) == OTDENS_OK);
  REQUIRE(r != nullptr);
  CHECK(otdens_result_converged(r) == 1);
  const long steps = otdens_result_steps(r);
  CHECK(steps > 0);
  CHECK(otdens_result_energy(r) > 0.0);
  CHECK(otdens_result_kkt(r) <= 1e-6);

  otdens_trace_row row;
  REQUIRE(otdens_result_trace_row(r, 0, &row) == OTDENS_OK);
  CHECK(row.step == 1);
  CHECK(row.tau > 0.0);
  CHECK(otdens_result_trace_row(r, steps, &row) == OTDENS_ERR_INVALID_ARGUMENT);

  std::vector<double> mu(static_cast<size_t>(otdens_problem_cell_count(p)));
  REQUIRE(otdens_result_mu(r, mu.data(), static_cast<int>(mu.size())) == OTDENS_OK);
  double mass = 0.0;
  for (double v : mu) {
    CHECK(v >= 0.0);
    mass += v / 128.0;
  }
  CHECK(mass > 0.01);
  CHECK(otdens_result_mu(r, mu.data(), 3) == OTDENS_ERR_INVALID_ARGUMENT);

  double lmin = 0.0, lmax = 0.0;
  REQUIRE(otdens_result_spectrum(r, &lmin, &lmax) == OTDENS_OK);
  CHECK(lmin > 0.0);
  CHECK(lmax >= lmin);

  double l2 = 0.0, w1 = 0.0;
  REQUIRE(otdens_result_errors(r, &l2, &w1) == OTDENS_OK);
  CHECK(l2 > 0.0);
  CHECK(w1 > 0.0);

  const auto dir = tmpdir();
  CHECK(otdens_result_write_trace_csv(r, (dir / "t.csv").string().c_str()) == OTDENS_OK);
  CHECK(otdens_result_write_vtk(r, (dir / "f.vtk").string().c_str()) == OTDENS_OK);
  CHECK(otdens_result_write_summary(r, (dir / "s.txt").string().c_str()) == OTDENS_OK);
  std::ifstream check_csv(dir / "t.csv");
  std::string header;
  std::getline(check_csv, header);
  CHECK(header == "step,tau,delta_sigma,grad_norm,kkt,newton_iters,restarts,energy");
  CHECK(otdens_result_write_trace_csv(r, "/no-such-dir/t.csv") == OTDENS_ERR_IO);

  otdens_result_destroy(r);
  otdens_problem_destroy(p);
}

TEST_CASE("invalid flow config is rejected with the field name") {
  otdens_problem* p = nullptr;
  REQUIRE(otdens_problem_create(0, "h", &p) == OTDENS_OK);
  otdens_flow_config cfg;
  otdens_flow_config_default(&cfg);
  cfg.alpha = 1.0;
  otdens_result* r = nullptr;
  CHECK(otdens_solve(p, "alg3", &cfg, &r) == OTDENS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(otdens_last_error()).find("alpha") != std::string::npos);
  CHECK(otdens_solve(p, "alg9", nullptr, &r) == OTDENS_ERR_INVALID_ARGUMENT);
  otdens_problem_destroy(p);
}

TEST_CASE("budget exhaustion still returns the partial run") {
  otdens_problem* p = nullptr;
  REQUIRE(otdens_problem_create(0, "h2", &p) == OTDENS_OK);
  otdens_flow_config cfg;
  otdens_flow_config_default(&cfg);
  cfg.n_step = 3;
  otdens_result* r = nullptr;
  CHECK(otdens_solve(p, "alg2", &cfg, &r) == OTDENS_ERR_BUDGET_EXHAUSTED);
  REQUIRE(r != nullptr);
  CHECK(otdens_result_converged(r) == 0);
  CHECK(otdens_result_steps(r) == 3);
  otdens_result_destroy(r);
  otdens_problem_destroy(p);
}

TEST_CASE("study over two coarse levels") {
  const auto dir = tmpdir() / "study";
  std::filesystem::remove_all(dir);
  const int levels[2] = {0, 1};
  otdens_flow_config cfg;
  otdens_flow_config_default(&cfg);
  double s_mu = 0.0, s_w1 = 0.0;
  const otdens_status st = otdens_study(levels, 2, "h2", "alg3", &cfg,
                                        dir.string().c_str(), 1, &s_mu, &s_w1);
  CHECK(st == OTDENS_OK);
  CHECK(std::filesystem::exists(dir / "convergence.csv"));
  CHECK(std::filesystem::exists(dir / "spectrum.csv"));
  CHECK(std::filesystem::exists(dir / "level0" / "trace.csv"));
  CHECK(std::filesystem::exists(dir / "level1" / "mu.vtk"));
  CHECK(s_mu > 0.0);
  CHECK(s_w1 > 0.0);
}
