#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "c3bv/core.hpp"
#include "c3bv/nmf.hpp"
#include "c3bv/prent.hpp"

namespace c3bv {

/// Two-group single-user instance in d = 2: contents are N_T copies of e1
/// (trend) followed by N_N copies of e2 (niche); the user is
/// theta_T e1 + theta_N e2 and the noise is U(-E_bar, E_bar).
GameInstance build_prent(const prent::Params& p, int k, MechanismId mechanism,
                         const AttentionWeights& attention, std::uint64_t seed, double lambda = 0.0);

enum class MarketKind { trend, niche };

struct MarketOptions {
  MarketKind kind = MarketKind::trend;
  int m = 400;
  int d = 10;
  int n_trend = 9;
  int n_niche = 1;
  double sigma_e = 0.5;
  int k = 1;
  MechanismId mechanism{};
  std::uint64_t seed = 0;
  double lambda = 0.0;
};

struct SyntheticMarket {
  GameInstance instance;
  Vec v_trend;
  Vec v_niche;
  std::vector<double> alpha;  // user i = alpha[i] v_T + beta[i] v_N
  std::vector<double> beta;
};

/// Users drawn from the trend cone {a v_T + b v_N : a > b >= 0} or the niche
/// cone (b > a), with (a, b) uniform on the corresponding half of the unit
/// square. v_T and v_N have disjoint random supports, so they are exactly
/// orthogonal.
SyntheticMarket build_synthetic_market(const MarketOptions& options);

struct DatasetOptions {
  int n_creators = 10;
  double sigma_e = 0.3;
  int k = 1;
  MechanismId mechanism{};
  std::uint64_t seed = 0;
  double lambda = 0.0;
};

struct DatasetInstance {
  GameInstance instance;
  std::vector<int> items;  // H rows used as the creators' initial contents
};

/// Users are the rows of W; contents are `n_creators` distinct nonzero rows
/// of H sampled uniformly and scaled to unit norm.
DatasetInstance build_dataset_instance(const NmfFactors& factors, const DatasetOptions& options);

nlohmann::json instance_to_json(const GameInstance& instance);
GameInstance instance_from_json(const nlohmann::json& j);
void save_instance(const GameInstance& instance, const std::filesystem::path& path);
GameInstance load_instance(const std::filesystem::path& path);

}  // namespace c3bv
