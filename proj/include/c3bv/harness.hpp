#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "c3bv/core.hpp"
#include "c3bv/dynamics.hpp"
#include "c3bv/envgen.hpp"
#include "c3bv/estimator.hpp"

namespace c3bv {

enum class Objective { user_welfare, nash_social_welfare };

Objective parse_objective(const std::string& name);
std::string to_string(Objective objective);

/// A sweep column: the non-strategic baseline (initial contents) or LBR
/// dynamics under one mechanism.
struct Mode {
  bool strategic = false;
  MechanismId mechanism{};

  static Mode baseline() { return {}; }
  static Mode with(MechanismId mech) { return {true, mech}; }
  std::string label() const;
};

struct SweepSpec {
  std::vector<double> lambda_grid{0.0, 0.1, 1.0, 10.0, 100.0};
  std::vector<MechanismId> mechanisms;
  bool include_nonstrategic = true;
  int replicates = 50;
  Objective objective = Objective::user_welfare;
  DynamicsConfig dynamics{};
  std::uint64_t master_seed = 0;
  EstimateOptions estimate{false, RidgeSolver::SingularPolicy::jitter};

  static std::vector<double> synthetic_grid();
  static std::vector<double> dataset_grid();

  void validate() const;
  /// Baseline first (if included), then mechanisms in spec order.
  std::vector<Mode> modes() const;
};

/// Builds the game for a mode's mechanism; lambda is applied by the harness.
using InstanceBuilder = std::function<GameInstance(const MechanismId&)>;

struct CellOutcome {
  double welfare = 0.0;
  double nsw = 0.0;
  bool jittered = false;
  std::optional<DynamicsTrace> trace;
};

/// One (lambda, mode, replicate) evaluation. Noise comes from `noise_seed`,
/// LBR proposals from `dynamics.seed`.
CellOutcome run_cell(const GameInstance& instance, double lambda, const Mode& mode,
                     std::uint64_t noise_seed, const DynamicsConfig& dynamics,
                     const EstimateOptions& estimate = {false, RidgeSolver::SingularPolicy::jitter},
                     bool keep_trace = false);

struct CellRecord {
  int lambda_index = 0;
  double lambda = 0.0;
  std::string mode;
  int replicate = 0;
  double welfare = 0.0;
  double nsw = 0.0;
  bool jittered = false;
};

struct Aggregate {
  std::string mode;
  int lambda_index = 0;
  double lambda = 0.0;
  long count = 0;
  double welfare_mean = 0.0;
  double welfare_stderr = 0.0;
  double nsw_mean = 0.0;
  double nsw_stderr = 0.0;

  double mean(Objective o) const { return o == Objective::user_welfare ? welfare_mean : nsw_mean; }
  double stderr_of(Objective o) const {
    return o == Objective::user_welfare ? welfare_stderr : nsw_stderr;
  }
};

struct Optimum {
  std::string mode;
  double lambda_star = 0.0;
  double mean = 0.0;
  double stderr_value = 0.0;
};

struct SweepResult {
  Objective objective = Objective::user_welfare;
  std::vector<std::string> modes;   // column order
  std::vector<double> lambda_grid;
  std::vector<CellRecord> cells;    // ordered by (lambda index, mode, replicate)
  std::vector<Aggregate> aggregates;  // ordered by (mode, lambda index)
  std::vector<Optimum> optima;        // one per mode

  const Optimum& optimum(const std::string& mode) const;
};

/// Per-cell seeds. Noise depends only on the replicate, so all lambdas and
/// modes of one replicate see the same rating noise.
std::uint64_t noise_seed(std::uint64_t master, int replicate);
std::uint64_t dynamics_seed(std::uint64_t master, int lambda_index, int mode_index, int replicate);

SweepResult run_sweep(const SweepSpec& spec, const InstanceBuilder& builder);

/// Aggregates and optima from a cell table (the same code path run_sweep
/// uses, so re-reading a cells.csv reproduces them exactly).
std::vector<Aggregate> aggregate_cells(const std::vector<CellRecord>& cells,
                                       const std::vector<std::string>& modes,
                                       const std::vector<double>& grid);
std::vector<Optimum> find_optima(const std::vector<Aggregate>& aggregates,
                                 const std::vector<std::string>& modes, Objective objective);

/// Sweep options from the JSON config format (fields mirror SweepSpec).
SweepSpec sweep_spec_from_json(const nlohmann::json& j, const SweepSpec& defaults = {});
DynamicsConfig dynamics_from_json(const nlohmann::json& j, DynamicsConfig base = {});

}  // namespace c3bv

namespace c3bv {

/// Environment section of a sweep config.
struct EnvironmentSpec {
  enum class Kind { trend_market, niche_market, prent, dataset };
  Kind kind = Kind::trend_market;
  int k = 1;
  MarketOptions market{};
  prent::Params prent{};
  // dataset: either a ratings file to ingest and factorize or saved factors
  std::string ratings_path;
  std::string ratings_format = "movielens";  // movielens | amazon | csv
  std::string factors_dir;
  NmfOptions nmf{};
  DatasetOptions dataset{};
  std::uint64_t seed = 0;
};

EnvironmentSpec environment_from_json(const nlohmann::json& j);

/// Builder for run_sweep. Dataset environments are ingested and factorized
/// once, here, and shared by every cell.
InstanceBuilder make_builder(const EnvironmentSpec& env);

}  // namespace c3bv
