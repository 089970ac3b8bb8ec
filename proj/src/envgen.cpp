#include "c3bv/envgen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "c3bv/rng.hpp"

namespace c3bv {

GameInstance build_prent(const prent::Params& p, int k, MechanismId mechanism,
                         const AttentionWeights& attention, std::uint64_t seed, double lambda) {
  // Re-validate: a hand-assembled Params may skip make().
  const auto checked = prent::Params::make(p.n_trend, p.n_niche, p.theta_trend, p.theta_niche, p.e_bar);
  if (attention.k() != k) throw UsageError("build_prent: attention length must equal K");
  Mat users(1, 2);
  users << checked.theta_trend, checked.theta_niche;
  std::vector<UnitNonnegVec> contents;
  for (int i = 0; i < checked.n_trend; ++i) contents.emplace_back(Vec::Unit(2, 0));
  for (int i = 0; i < checked.n_niche; ++i) contents.emplace_back(Vec::Unit(2, 1));
  return GameInstance(lambda, std::move(users), std::move(contents),
                      NoiseModel::uniform(checked.e_bar), mechanism, attention, seed);
}

namespace {

// Random split of {0..d-1} into two nonempty supports with positive weights.
std::pair<Vec, Vec> orthogonal_nonneg_pair(int d, Rng& rng) {
  if (d < 2) throw UsageError("synthetic market: d must be >= 2");
  std::vector<int> coords(static_cast<std::size_t>(d));
  std::iota(coords.begin(), coords.end(), 0);
  std::shuffle(coords.begin(), coords.end(), rng);
  std::uniform_int_distribution<int> split_dist(1, d - 1);
  const int split = split_dist(rng);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  Vec a = Vec::Zero(d);
  Vec b = Vec::Zero(d);
  for (int t = 0; t < d; ++t) {
    const int c = coords[static_cast<std::size_t>(t)];
    (t < split ? a : b)[c] = weight(rng);
  }
  a /= a.norm();
  b /= b.norm();
  return {a, b};
}

}  // namespace

SyntheticMarket build_synthetic_market(const MarketOptions& o) {
  if (o.m < 1) throw UsageError("synthetic market: m must be >= 1");
  if (o.n_trend < 1 || o.n_niche < 1) throw UsageError("synthetic market: need both groups");
  if (!(o.sigma_e > 0.0)) throw UsageError("synthetic market: sigma_e must be positive");
  Rng rng(derive_seed(o.seed, {0x5EED}));
  auto [v_t, v_n] = orthogonal_nonneg_pair(o.d, rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> alpha;
  std::vector<double> beta;
  Mat users(o.m, o.d);
  for (int i = 0; i < o.m; ++i) {
    double x = 0.0;
    double y = 0.0;
    do {
      x = unit(rng);
      y = unit(rng);
    } while (x == y);
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    const double a = o.kind == MarketKind::trend ? hi : lo;
    const double b = o.kind == MarketKind::trend ? lo : hi;
    alpha.push_back(a);
    beta.push_back(b);
    users.row(i) = (a * v_t + b * v_n).transpose();
  }
  std::vector<UnitNonnegVec> contents;
  for (int j = 0; j < o.n_trend; ++j) contents.emplace_back(v_t);
  for (int j = 0; j < o.n_niche; ++j) contents.emplace_back(v_n);
  return {GameInstance(o.lambda, std::move(users), std::move(contents),
                       NoiseModel::gaussian(o.sigma_e), o.mechanism,
                       AttentionWeights::log_discount(o.k), o.seed),
          v_t, v_n, std::move(alpha), std::move(beta)};
}

DatasetInstance build_dataset_instance(const NmfFactors& factors, const DatasetOptions& o) {
  if (o.n_creators < 1) throw UsageError("dataset instance: n_creators must be >= 1");
  if (factors.w.rows() < 1 || factors.h.rows() < 1 || factors.w.cols() != factors.h.cols()) {
    throw UsageError("dataset instance: malformed factors");
  }
  std::vector<int> nonzero;
  for (Eigen::Index j = 0; j < factors.h.rows(); ++j) {
    if (factors.h.row(j).maxCoeff() > 0.0) nonzero.push_back(static_cast<int>(j));
  }
  if (static_cast<int>(nonzero.size()) < o.n_creators) {
    throw DegenerateInputError("dataset instance: only " + std::to_string(nonzero.size()) +
                               " nonzero item rows, need " + std::to_string(o.n_creators));
  }
  Rng rng(derive_seed(o.seed, {0xDA7A}));
  // Partial Fisher-Yates: the first n_creators slots are a uniform sample.
  for (int t = 0; t < o.n_creators; ++t) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(t), nonzero.size() - 1);
    std::swap(nonzero[static_cast<std::size_t>(t)], nonzero[pick(rng)]);
  }
  std::vector<int> items(nonzero.begin(), nonzero.begin() + o.n_creators);
  std::vector<UnitNonnegVec> contents;
  for (int item : items) {
    contents.push_back(project_nonneg_sphere(factors.h.row(item).transpose()));
  }
  return {GameInstance(o.lambda, factors.w, std::move(contents), NoiseModel::gaussian(o.sigma_e),
                       o.mechanism, AttentionWeights::log_discount(o.k), o.seed),
          std::move(items)};
}

namespace {

nlohmann::json matrix_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(i, c);
    rows.push_back(row);
  }
  return rows;
}

Mat json_matrix(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) throw ParseError("instance: expected a nonempty matrix", 0);
  const auto cols = rows.front().size();
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ParseError("instance: ragged matrix", 0);
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c].get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json instance_to_json(const GameInstance& g) {
  nlohmann::json noise = {{"kind", "none"}, {"scale", g.noise().scale}};
  if (g.noise().kind == NoiseModel::Kind::gaussian) noise["kind"] = "gaussian";
  if (g.noise().kind == NoiseModel::Kind::uniform) noise["kind"] = "uniform";
  return {
      {"lambda", g.lambda()},
      {"users", matrix_json(g.users())},
      {"contents", matrix_json(g.content_matrix())},
      {"noise", noise},
      {"mechanism", g.mechanism().name()},
      {"attention", g.attention().values()},
      {"seed", g.seed()},
  };
}

GameInstance instance_from_json(const nlohmann::json& j) {
  try {
    const Mat content_rows = json_matrix(j.at("contents"));
    std::vector<UnitNonnegVec> contents;
    for (Eigen::Index r = 0; r < content_rows.rows(); ++r) {
      contents.emplace_back(content_rows.row(r).transpose());
    }
    const auto& nj = j.at("noise");
    const std::string kind = nj.at("kind").get<std::string>();
    NoiseModel noise;
    if (kind == "gaussian") {
      noise = NoiseModel::gaussian(nj.at("scale").get<double>());
    } else if (kind == "uniform") {
      noise = NoiseModel::uniform(nj.at("scale").get<double>());
    } else if (kind != "none") {
      throw ParseError("instance: unknown noise kind '" + kind + "'", 0);
    }
    return GameInstance(j.at("lambda").get<double>(), json_matrix(j.at("users")),
                        std::move(contents), noise,
                        MechanismId::parse(j.at("mechanism").get<std::string>()),
                        AttentionWeights(j.at("attention").get<std::vector<double>>()),
                        j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance: ") + e.what(), 0);
  }
}

void save_instance(const GameInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << instance_to_json(instance).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

GameInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return instance_from_json(j);
}

}  // namespace c3bv
