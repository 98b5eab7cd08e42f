#include "io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace otdens {

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

uint32_t rotl(uint32_t x, int s) { return (x << s) | (x >> (32 - s)); }

}  // namespace

std::string sha1_hex(const std::string& data) {
  uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
  const uint64_t ml = static_cast<uint64_t>(data.size()) * 8;
  std::string msg = data;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((ml >> (8 * i)) & 0xFF));

  for (size_t off = 0; off < msg.size(); off += 64) {
    uint32_t w[80];
    for (int t = 0; t < 16; ++t)
      w[t] = (static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t])) << 24) |
             (static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 1])) << 16) |
             (static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 2])) << 8) |
             static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 3]));
    for (int t = 16; t < 80; ++t) w[t] = rotl(w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16], 1);
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int t = 0; t < 80; ++t) {
      uint32_t f, k;
      if (t < 20) { f = (b & c) | (~b & d); k = 0x5A827999u; }
      else if (t < 40) { f = b ^ c ^ d; k = 0x6ED9EBA1u; }
      else if (t < 60) { f = (b & c) | (b & d) | (c & d); k = 0x8F1BBCDCu; }
      else { f = b ^ c ^ d; k = 0xCA62C1D6u; }
      const uint32_t tmp = rotl(a, 5) + f + e + k + w[t];
      e = d; d = c; c = rotl(b, 30); b = a; a = tmp;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
  }
  std::string hex;
  hex.reserve(40);
  for (uint32_t v : h)
    for (int i = 7; i >= 0; --i) hex.push_back("0123456789abcdef"[(v >> (4 * i)) & 0xF]);
  return hex;
}

std::string config_snapshot(const RunRecord& rec) {
  std::ostringstream ss;
  ss << "algorithm=" << rec.algorithm << "\n"
     << "delta_rule=" << rec.delta_rule << "\n"
     << "level=" << rec.level << "\n"
     << "delta=" << format_double(rec.delta) << "\n"
     << "h=" << format_double(rec.h) << "\n"
     << "tau0=" << format_double(rec.flow.tau0) << "\n"
     << "alpha=" << format_double(rec.flow.alpha) << "\n"
     << "eps=" << format_double(rec.flow.eps) << "\n"
     << "toll=" << format_double(rec.flow.toll) << "\n"
     << "kkt_toll=" << format_double(rec.flow.kkt_toll) << "\n"
     << "n_step=" << rec.flow.n_step << "\n"
     << "r_max=" << rec.flow.r_max << "\n";
  return ss.str();
}

void write_trace_csv(const RunRecord& rec, const std::string& path) {
  auto out = open_out(path);
  out << "step,tau,delta_sigma,grad_norm,kkt,newton_iters,restarts,energy\n";
  for (const TraceRow& r : rec.rows) {
    out << r.step << ',' << format_double(r.tau) << ',' << format_double(r.delta_sigma)
        << ',' << format_double(r.grad_norm) << ',' << format_double(r.kkt) << ','
        << r.newton_iters << ',' << r.restarts << ',' << format_double(r.energy) << '\n';
  }
  finish(out, path);
}

void write_field_vtk(const TriMesh& mesh, const Vec& mu, const std::string& path) {
  if (mu.size() != mesh.triangle_count())
    throw std::invalid_argument("write_field_vtk: field size != triangle count");
  for (int i = 0; i < mu.size(); ++i)
    if (mu[i] < 0.0) throw std::invalid_argument("write_field_vtk: negative density entry");

  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << "transport density field\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.vertex_count() << " double\n";
  for (const Point2& p : mesh.vertices)
    out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  out << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.triangle_count() << '\n';
  for (int i = 0; i < mesh.triangle_count(); ++i) out << "5\n";
  out << "CELL_DATA " << mesh.triangle_count() << '\n'
      << "SCALARS mu double 1\n"
      << "LOOKUP_TABLE default\n";
  for (int i = 0; i < mu.size(); ++i) out << format_double(mu[i]) << '\n';
  finish(out, path);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InsufficientDataError("loglog_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_convergence_table(const std::vector<LevelErrorRecord>& records,
                             const std::string& path) {
  if (records.size() < 2)
    throw InsufficientDataError("write_convergence_table: need at least two levels");
  auto out = open_out(path);
  out << "level,h,l2_mu_error,w1_error\n";
  std::vector<double> h, e_mu, e_w1;
  for (const auto& r : records) {
    out << r.level << ',' << format_double(r.h) << ',' << format_double(r.l2_mu_error)
        << ',' << format_double(r.w1_error) << '\n';
    h.push_back(r.h);
    e_mu.push_back(r.l2_mu_error);
    e_w1.push_back(r.w1_error);
  }
  out << "# slope_l2_mu=" << format_double(loglog_slope(h, e_mu)) << '\n';
  out << "# slope_w1=" << format_double(loglog_slope(h, e_w1)) << '\n';
  finish(out, path);
}

void write_spectrum_table(const std::vector<SpectrumRecord>& records,
                          const std::string& path) {
  auto out = open_out(path);
  out << "level,h,delta,lambda_min,lambda_max,method,converged\n";
  for (const auto& r : records) {
    out << r.level << ',' << format_double(r.h) << ',' << format_double(r.report.delta)
        << ',' << format_double(r.report.lambda_min) << ','
        << format_double(r.report.lambda_max) << ','
        << (r.report.method == SpectrumReport::Method::dense ? "dense" : "iterative") << ','
        << (r.report.converged ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void write_run_summary(const RunRecord& rec, const std::string& path) {
  auto out = open_out(path);
  out << config_snapshot(rec);
  out << "config_hash=" << rec.config_hash << "\n"
      << "steps=" << rec.rows.size() << "\n"
      << "converged=" << (rec.converged ? 1 : 0) << "\n"
      << "energy=" << format_double(rec.energy) << "\n"
      << "grad_norm=" << format_double(rec.grad_norm) << "\n"
      << "kkt=" << format_double(rec.kkt) << "\n";
  if (rec.spectrum) {
    out << "lambda_min=" << format_double(rec.spectrum->lambda_min) << "\n"
        << "lambda_max=" << format_double(rec.spectrum->lambda_max) << "\n"
        << "spectrum_method="
        << (rec.spectrum->method == SpectrumReport::Method::dense ? "dense" : "iterative")
        << "\n";
  }
  if (rec.errors) {
    out << "l2_mu_error=" << format_double(rec.errors->l2_mu_error) << "\n"
        << "w1_error=" << format_double(rec.errors->w1_error) << "\n";
  }
  out << "wall_seconds=" << format_double(rec.wall_seconds) << "\n";
  finish(out, path);
}

}  // namespace otdens
