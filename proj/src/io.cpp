#include "tractrix/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "tractrix/error.hpp"

namespace tractrix {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void put_vec(std::string& line, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) {
    line += format_double(v[i]);
    line += ',';
  }
}

std::string vec_header(const char* name, int dim) {
  std::string h;
  for (int i = 1; i <= dim; ++i) h += std::string(name) + "_" + std::to_string(i) + ",";
  return h;
}

bool parse_cell(std::string_view cell, double& out) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t'))
    cell.remove_suffix(1);
  if (cell.empty()) {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return r.ec == std::errc() && r.ptr == cell.data() + cell.size();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_trace_csv(const fs::path& path, const TractrixTrace& trace) {
  auto out = open_out(path);
  const int dim = trace.records.empty() ? trace.model.dimension()
                                        : static_cast<int>(trace.records.front().gamma.size());
  out << "t,s," << vec_header("gamma", dim) << vec_header("eta", dim) << "d,kappa,sigma\n";
  std::string line;
  for (const auto& r : trace.records) {
    line.clear();
    line += format_double(r.t) + ',' + format_double(r.s) + ',';
    put_vec(line, r.gamma);
    put_vec(line, r.eta);
    if (r.has_d && std::isfinite(r.d)) line += format_double(r.d);
    line += ',';
    if (!r.singular && !r.kappa_masked && std::isfinite(r.kappa)) line += format_double(r.kappa);
    line += ',';
    line += std::to_string(r.sigma);
    line += '\n';
    out << line;
  }
}

void write_cusps(const fs::path& path, const TractrixTrace& trace) {
  ordered_json list = ordered_json::array();
  for (const auto& c : trace.cusps)
    list.push_back({{"t", number(c.t)},
                    {"s", number(c.s)},
                    {"turning_angle", number(c.turning_angle)},
                    {"pole_rotation", number(c.pole_rotation)}});
  write_json(path, list);
}

void write_sweep(const fs::path& path, const SweepResult& sw) {
  write_json(path, {{"L_gamma", number(sw.L_gamma)},
                    {"L_eta", number(sw.L_eta)},
                    {"K_total", number(sw.K_total)},
                    {"area", number(sw.area)},
                    {"ell", number(sw.ell)},
                    {"gap_bound", number(sw.gap_bound)},
                    {"L_eta_measured", number(sw.L_eta_measured)},
                    {"L_eta_polyline", number(sw.L_eta_polyline)}});
}

void write_analytic_csv(const fs::path& path, const std::vector<SpaceFormRow>& rows) {
  auto out = open_out(path);
  out << "s,d,kappa\n";
  for (const auto& r : rows) {
    out << format_double(r.s) << ',' << format_double(r.d) << ',';
    if (std::isfinite(r.kappa)) out << format_double(r.kappa);
    out << '\n';
  }
}

void write_le(const fs::path& path, const std::vector<LeEntry>& entries) {
  ordered_json list = ordered_json::array();
  for (const auto& e : entries)
    list.push_back({{"K", number(e.K)}, {"ell", number(e.ell)}, {"Le", number(e.Le)}});
  write_json(path, list);
}

void write_long_pole_csv(const fs::path& path, const std::vector<LongPoleSample>& samples) {
  auto out = open_out(path);
  out << "s,t,d,a,A_1,A_2,B_1,B_2,C_1,C_2\n";
  std::string line;
  for (const auto& p : samples) {
    line = format_double(p.s) + ',' + format_double(p.t) + ',' + format_double(p.d) + ',' +
           format_double(p.a) + ',';
    put_vec(line, p.A);
    put_vec(line, p.B);
    put_vec(line, p.C);
    line.back() = '\n';
    out << line;
  }
}

void write_history(const fs::path& path, const ShorteningRun& run) {
  auto out = open_out(path);
  out << "iter,length,residual\n";
  for (std::size_t i = 0; i < run.iterates.size(); ++i)
    out << i << ',' << format_double(run.iterates[i].length) << ','
        << format_double(run.iterates[i].residual) << '\n';
}

void write_polyline_csv(const fs::path& path, const std::vector<Vec>& pts) {
  auto out = open_out(path);
  const int dim = pts.empty() ? 2 : static_cast<int>(pts.front().size());
  std::string h = vec_header("x", dim);
  h.back() = '\n';
  out << h;
  std::string line;
  for (const auto& p : pts) {
    line.clear();
    put_vec(line, p);
    line.back() = '\n';
    out << line;
  }
}

void write_iterates(const fs::path& dir, const ShorteningRun& run) {
  for (std::size_t i = 0; i < run.iterates.size(); ++i) {
    if (run.iterates[i].curve.empty()) continue;
    write_polyline_csv(dir / ("iter_" + std::to_string(i) + ".csv"), run.iterates[i].curve);
  }
}

void write_report(const fs::path& path, const ComparisonReport& report,
                  const std::vector<CurvatureBounds>& bounds) {
  ordered_json b = ordered_json::array();
  for (const auto& cb : bounds)
    b.push_back({{"K_lo", number(cb.K_lo)},
                 {"K_hi", number(cb.K_hi)},
                 {"method", to_string(cb.method)},
                 {"sampled_lo", number(cb.sampled_lo)},
                 {"sampled_hi", number(cb.sampled_hi)}});
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"inequality", c.inequality},
                      {"lhs", number(c.lhs)},
                      {"rhs", number(c.rhs)},
                      {"margin", number(c.margin)},
                      {"status", to_string(c.status)},
                      {"pass", c.status == Check::Status::Pass},
                      {"samples", c.samples},
                      {"violations", c.violations},
                      {"note", c.note}});
  write_json(path, {{"scenario", report.scenario},
                    {"passes", report.passes()},
                    {"failures", report.failures()},
                    {"bounds", b},
                    {"checks", checks}});
}

std::vector<std::vector<double>> read_csv_numbers(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::vector<double> row;
    bool ok = true;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_cell(rest.substr(0, comma), v)) {
        ok = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw Error(ErrorCode::InvalidArgument,
                  path.string() + ":" + std::to_string(lineno) + ": not a numeric row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Vec> read_polyline_csv(const fs::path& path) {
  const auto rows = read_csv_numbers(path);
  std::vector<Vec> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 2 && r.size() != 3)
      throw Error(ErrorCode::InvalidArgument, path.string() + ": polyline rows need 2 or 3 values");
    if (!pts.empty() && static_cast<std::size_t>(pts.front().size()) != r.size())
      throw Error(ErrorCode::InvalidArgument, path.string() + ": ragged polyline");
    pts.push_back(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
  }
  return pts;
}

std::vector<Vec> read_trace_gamma(const fs::path& path) {
  const auto rows = read_csv_numbers(path);
  std::vector<Vec> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) {
    // t, s, gamma (dim), eta (dim), d, kappa, sigma
    if (r.size() != 9 && r.size() != 11)
      throw Error(ErrorCode::InvalidArgument, path.string() + ": not a trace file");
    const Eigen::Index dim = r.size() == 9 ? 2 : 3;
    pts.push_back(Eigen::Map<const Eigen::VectorXd>(r.data() + 2, dim));
  }
  return pts;
}

}  // namespace tractrix
