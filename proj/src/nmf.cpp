#include "c3bv/nmf.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "c3bv/rng.hpp"

namespace c3bv {

namespace {

void write_matrix_csv(const Mat& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Mat read_matrix_csv(const std::filesystem::path& path, Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string field;
    Eigen::Index count = 0;
    while (std::getline(is, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number", line_no);
      }
      ++count;
    }
    if (count != cols) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(cols) + " columns",
                       line_no);
    }
    ++rows;
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

}  // namespace

NmfFactors factorize_nmf(const RatingTable& table, const NmfOptions& options) {
  if (table.empty()) throw UsageError("nmf: empty rating table");
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> entries;
  entries.reserve(table.size());
  for (const auto& t : table.triples()) entries.emplace_back(t.user, t.item, t.rating);
  kernels::SparseMat v(table.num_users(), table.num_items());
  v.setFromTriplets(entries.begin(), entries.end());
  return factorize_nmf(v, options);
}

NmfFactors factorize_nmf(const kernels::SparseMat& v, const NmfOptions& options) {
  if (options.d < 1) throw UsageError("nmf: d must be >= 1");
  if (options.max_iter < 0) throw UsageError("nmf: max_iter must be >= 0");
  if (v.rows() < 1 || v.cols() < 1 || v.nonZeros() == 0) throw UsageError("nmf: empty matrix");
  for (Eigen::Index k = 0; k < v.outerSize(); ++k) {
    for (kernels::SparseMat::InnerIterator it(v, k); it; ++it) {
      if (!(it.value() >= 0.0) || !std::isfinite(it.value())) {
        throw UsageError("nmf: entries must be finite and nonnegative");
      }
    }
  }
  const kernels::SparseMat vt = v.transpose();
  const double v_sq = v.squaredNorm();
  const double mean = v.sum() / (static_cast<double>(v.rows()) * static_cast<double>(v.cols()));
  const double scale = std::sqrt(mean / options.d);

  NmfFactors out;
  out.d = options.d;
  out.seed = options.seed;
  out.max_iter = options.max_iter;
  out.tol = options.tol;
  Rng rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.w.resize(v.rows(), options.d);
  out.h.resize(v.cols(), options.d);
  for (Eigen::Index i = 0; i < out.w.rows(); ++i)
    for (Eigen::Index c = 0; c < options.d; ++c) out.w(i, c) = scale * unit(rng);
  for (Eigen::Index j = 0; j < out.h.rows(); ++j)
    for (Eigen::Index c = 0; c < options.d; ++c) out.h(j, c) = scale * unit(rng);

  double prev = kernels::nmf_objective(vt, out.w, out.h, v_sq, options.exec);
  out.objective_history.push_back(prev);
  for (int it = 0; it < options.max_iter; ++it) {
    kernels::nmf_update(v, vt, out.w, out.h, options.exec);
    const double cur = kernels::nmf_objective(vt, out.w, out.h, v_sq, options.exec);
    out.objective_history.push_back(cur);
    out.iterations = it + 1;
    const double change = std::abs(prev - cur) / std::max(prev, 1e-300);
    prev = cur;
    if (change < options.tol) {
      out.converged = true;
      break;
    }
  }
  out.objective = prev;
  out.relative_error = v_sq > 0.0 ? std::sqrt(prev / v_sq) : 0.0;
  return out;
}

void save_factors(const NmfFactors& factors, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_matrix_csv(factors.w, dir / "W.csv");
  write_matrix_csv(factors.h, dir / "H.csv");
  nlohmann::json manifest = {
      {"d", factors.d},
      {"seed", factors.seed},
      {"max_iter", factors.max_iter},
      {"tol", factors.tol},
      {"iterations", factors.iterations},
      {"converged", factors.converged},
      {"objective", factors.objective},
      {"relative_error", factors.relative_error},
      {"users", factors.w.rows()},
      {"items", factors.h.rows()},
      {"objective_kind", "frobenius"},
      {"masking", "zero_filled"},
      {"update_rule", "lee_seung_multiplicative"},
  };
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

NmfFactors load_factors(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what(), 0);
  }
  NmfFactors f;
  f.d = manifest.at("d").get<int>();
  f.seed = manifest.at("seed").get<std::uint64_t>();
  f.max_iter = manifest.value("max_iter", 0);
  f.tol = manifest.value("tol", 0.0);
  f.iterations = manifest.value("iterations", 0);
  f.converged = manifest.value("converged", false);
  f.objective = manifest.value("objective", 0.0);
  f.relative_error = manifest.value("relative_error", 0.0);
  f.w = read_matrix_csv(dir / "W.csv", f.d);
  f.h = read_matrix_csv(dir / "H.csv", f.d);
  if ((f.w.array() < 0.0).any() || (f.h.array() < 0.0).any()) {
    throw ParseError("factor files contain negative entries", 0);
  }
  return f;
}

}  // namespace c3bv
