#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "io.hpp"

using namespace otdens;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path tmpdir() {
  auto dir = std::filesystem::temp_directory_path() / "otdens_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

RunRecord sample_record() {
  RunRecord rec;
  rec.algorithm = "alg2";
  rec.delta_rule = "h2";
  rec.level = 0;
  rec.delta = 0.03125;
  rec.h = 0.17678;
  rec.config_hash = sha1_hex(config_snapshot(rec));
  TraceRow r1{1, 1.0, 0.125, 0.0625, 1e-3, 2, 0, 0.98765432101234};
  TraceRow r2{2, 1.0, 0.0625, 0.03125, 1e-4, 1, 0, 0.87654321012345};
  rec.rows = {r1, r2};
  rec.converged = true;
  return rec;
}

}  // namespace

TEST_CASE("shortest round-trip float formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e-9, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("sha1 known vectors") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST_CASE("config hash is stable under re-serialization") {
  const RunRecord rec = sample_record();
  RunRecord copy = rec;
  copy.config_hash = sha1_hex(config_snapshot(copy));
  CHECK(copy.config_hash == rec.config_hash);
}

TEST_CASE("trace csv: header, rows, bit-exact round trip") {
  const auto dir = tmpdir();
  RunRecord rec = sample_record();

  RunRecord empty = rec;
  empty.rows.clear();
  const std::string p_empty = (dir / "empty.csv").string();
  write_trace_csv(empty, p_empty);
  CHECK(slurp(p_empty) == "step,tau,delta_sigma,grad_norm,kkt,newton_iters,restarts,energy\n");

  const std::string p = (dir / "trace.csv").string();
  write_trace_csv(rec, p);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  size_t idx = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 8);
    const TraceRow& r = rec.rows[idx++];
    CHECK(std::strtol(cells[0].c_str(), nullptr, 10) == r.step);
    CHECK(std::strtod(cells[1].c_str(), nullptr) == r.tau);
    CHECK(std::strtod(cells[2].c_str(), nullptr) == r.delta_sigma);
    CHECK(std::strtod(cells[3].c_str(), nullptr) == r.grad_norm);
    CHECK(std::strtod(cells[4].c_str(), nullptr) == r.kkt);
    CHECK(std::strtod(cells[7].c_str(), nullptr) == r.energy);
  }
  CHECK(idx == rec.rows.size());

  // deterministic writers: byte-identical on a second pass
  const std::string p2 = (dir / "trace2.csv").string();
  write_trace_csv(rec, p2);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("legacy vtk field writer") {
  const auto dir = tmpdir();
  const TriMesh m = build_unit_square_mesh(1);
  Vec mu(2);
  mu << 0.25, 0.0;
  const std::string p = (dir / "mu.vtk").string();
  write_field_vtk(m, mu, p);
  const std::string body = slurp(p);
  CHECK(body.find("POINTS 4 double") != std::string::npos);
  CHECK(body.find("CELLS 2 8") != std::string::npos);
  CHECK(body.find("CELL_TYPES 2") != std::string::npos);
  CHECK(body.find("SCALARS mu double 1") != std::string::npos);
  CHECK(body.find("0.25") != std::string::npos);

  Vec bad(2);
  bad << 0.1, -1e-9;
  CHECK_THROWS_AS(write_field_vtk(m, bad, p), std::invalid_argument);
  Vec wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(write_field_vtk(m, wrong, p), std::invalid_argument);
}

TEST_CASE("convergence table slopes") {
  const auto dir = tmpdir();
  const std::string p = (dir / "conv.csv").string();

  // two levels, error ratio 4 at h ratio 2: slope exactly 2
  std::vector<LevelErrorRecord> two = {{0, 0.2, 0.4, 0.08}, {1, 0.1, 0.1, 0.02}};
  write_convergence_table(two, p);
  const std::string body = slurp(p);
  CHECK(body.find("level,h,l2_mu_error,w1_error\n") == 0);
  auto slope_after = [&body](const std::string& key) {
    const size_t pos = body.find(key);
    REQUIRE(pos != std::string::npos);
    return std::strtod(body.c_str() + pos + key.size(), nullptr);
  };
  CHECK(slope_after("# slope_l2_mu=") == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(slope_after("# slope_w1=") == doctest::Approx(2.0).epsilon(1e-12));

  // synthetic power law recovered exactly
  std::vector<LevelErrorRecord> synth;
  for (int l = 0; l < 4; ++l) {
    const double h = 0.17678 / (1 << l);
    synth.push_back({l, h, 3.0 * std::pow(h, 1.38), 2.0 * std::pow(h, 1.38)});
  }
  std::vector<double> hs, es;
  for (const auto& r : synth) {
    hs.push_back(r.h);
    es.push_back(r.l2_mu_error);
  }
  CHECK(loglog_slope(hs, es) == doctest::Approx(1.38).epsilon(1e-10));

  std::vector<LevelErrorRecord> one = {{0, 0.2, 0.4, 0.08}};
  CHECK_THROWS_AS(write_convergence_table(one, p), InsufficientDataError);
}

TEST_CASE("run summary carries the diagnostics") {
  const auto dir = tmpdir();
  RunRecord rec = sample_record();
  rec.energy = 0.1201;
  rec.kkt = 3e-8;
  SpectrumReport sp;
  sp.lambda_min = 1e-3;
  sp.lambda_max = 5e-2;
  rec.spectrum = sp;
  rec.errors = ErrorReport{0.012, 0.0049};
  const std::string p = (dir / "summary.txt").string();
  write_run_summary(rec, p);
  const std::string body = slurp(p);
  CHECK(body.find("algorithm=alg2") != std::string::npos);
  CHECK(body.find("lambda_min=0.001") != std::string::npos);
  CHECK(body.find("l2_mu_error=0.012") != std::string::npos);
  CHECK(body.find("config_hash=" + rec.config_hash) != std::string::npos);
}

TEST_CASE("io failures carry the path") {
  const RunRecord rec = sample_record();
  try {
    write_trace_csv(rec, "/nonexistent-dir/trace.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/trace.csv") != std::string::npos);
  }
}
