#include "c3bv/export.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace c3bv {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("write failed: " + path.string());
}

std::string safe_name(const std::string& mode) {
  std::string s = mode;
  for (char& c : s) {
    if (c == ':' || c == '/' || c == ' ') c = '_';
  }
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void export_results(const SweepResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  {
    const auto path = out_dir / "cells.csv";
    auto out = open_out(path);
    out << "lambda_index,lambda,mode,replicate,welfare,nsw,jittered\n";
    for (const auto& c : result.cells) {
      out << c.lambda_index << ',' << num(c.lambda) << ',' << c.mode << ',' << c.replicate << ','
          << num(c.welfare) << ',' << num(c.nsw) << ',' << (c.jittered ? 1 : 0) << '\n';
    }
    check(out, path);
  }
  {
    const auto path = out_dir / "aggregates.csv";
    auto out = open_out(path);
    out << "mode,lambda_index,lambda,count,welfare_mean,welfare_stderr,nsw_mean,nsw_stderr\n";
    for (const auto& a : result.aggregates) {
      out << a.mode << ',' << a.lambda_index << ',' << num(a.lambda) << ',' << a.count << ','
          << num(a.welfare_mean) << ',' << num(a.welfare_stderr) << ',' << num(a.nsw_mean) << ','
          << num(a.nsw_stderr) << '\n';
    }
    check(out, path);
  }
  {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& o : result.optima) {
      j[o.mode] = {{"lambda_star", o.lambda_star},
                   {"welfare_mean", o.mean},
                   {"welfare_stderr", o.stderr_value},
                   {"objective", to_string(result.objective)}};
    }
    const auto path = out_dir / "optima.json";
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    check(out, path);
  }
  for (const auto& mode : result.modes) {
    const auto path = out_dir / ("plot_" + safe_name(mode) + ".csv");
    auto out = open_out(path);
    out << "lambda,mean,stderr\n";
    for (const auto& a : result.aggregates) {
      if (a.mode != mode) continue;
      out << num(a.lambda) << ',' << num(a.mean(result.objective)) << ','
          << num(a.stderr_of(result.objective)) << '\n';
    }
    check(out, path);
  }
  {
    const auto path = out_dir / "welfare_curve.svg";
    auto out = open_out(path);
    out << render_svg(result);
    check(out, path);
  }
}

std::vector<CellRecord> read_cells_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
  std::vector<CellRecord> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields", line_no);
    }
    try {
      cells.push_back({std::stoi(f[0]), std::stod(f[1]), f[2], std::stoi(f[3]), std::stod(f[4]),
                       std::stod(f[5]), f[6] == "1"});
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number", line_no);
    }
  }
  return cells;
}

void write_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,creator_id,utility,welfare\n";
  for (const auto& r : trace.rows) {
    out << r.step << ',' << r.creator << ',' << num(r.utility) << ',' << num(r.welfare) << '\n';
  }
  check(out, path);
}

std::string render_svg(const SweepResult& result) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 160, kTop = 30, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& a : result.aggregates) {
    lo = std::min(lo, a.mean(result.objective));
    hi = std::max(hi, a.mean(result.objective));
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const std::size_t nx = result.lambda_grid.size();
  // Grid points are spaced evenly by index so log-like grids stay readable.
  auto xpos = [&](int li) { return kLeft + (nx > 1 ? pw * li / static_cast<double>(nx - 1) : pw / 2); };
  auto ypos = [&](double v) { return kTop + ph * (hi - v) / (hi - lo); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                 "#8c564b", "#e377c2", "#7f7f7f"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\""
     << kTop + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
     << "\" stroke=\"black\"/>\n";
  for (std::size_t li = 0; li < nx; ++li) {
    os << "<text x=\"" << xpos(static_cast<int>(li)) << "\" y=\"" << kTop + ph + 18
       << "\" font-size=\"11\" text-anchor=\"middle\">" << result.lambda_grid[li] << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
     << "\" font-size=\"12\" text-anchor=\"middle\">lambda</text>\n";
  os << "<text x=\"8\" y=\"" << kTop - 10 << "\" font-size=\"12\">" << to_string(result.objective)
     << " [" << lo << ", " << hi << "]</text>\n";
  for (std::size_t mi = 0; mi < result.modes.size(); ++mi) {
    const auto& mode = result.modes[mi];
    const char* color = colors[mi % (sizeof colors / sizeof colors[0])];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& a : result.aggregates) {
      if (a.mode != mode) continue;
      os << (first ? "" : " ") << xpos(a.lambda_index) << ',' << ypos(a.mean(result.objective));
      first = false;
    }
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + pw + 10 << "\" y=\"" << kTop + 16 * (mi + 1) << "\" font-size=\"11\" fill=\""
       << color << "\">" << mode << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace c3bv
