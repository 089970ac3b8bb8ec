#pragma once

#include <cstdint>
#include <vector>

#include "c3bv/core.hpp"
#include "c3bv/estimator.hpp"
#include "c3bv/rng.hpp"

namespace c3bv {

struct DynamicsConfig {
  enum class Order { round_robin, random_permutation };
  // Where the better-response test evaluates the candidate. `unprojected`
  // scores s_j + eta g before projecting the accepted move (the order of the
  // LBR update); `projected` scores the feasible point the creator would land on.
  enum class CandidateEval { unprojected, projected };
  enum class Record { full, final_only };

  double eta = 0.05;
  long horizon = 800;
  Order order = Order::round_robin;
  CandidateEval candidate_eval = CandidateEval::unprojected;
  Record record = Record::full;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  long step;
  int creator;
  double utility;
  double welfare;
};

struct DynamicsTrace {
  std::vector<TraceRow> rows;        // one row per (recorded step, creator)
  std::vector<double> welfare;       // welfare after each recorded step, step 0 first
  StrategyProfile final_profile;
  long accepted_moves = 0;
  long proposals = 0;
};

/// Incremental Local Better Response state: keeps the m x n score board in
/// sync with the strategy profile so each proposal costs O(m (n + d)).
class LbrEngine {
 public:
  LbrEngine(const GameInstance& instance, const Mat& u_hat, StrategyProfile profile,
            DynamicsConfig cfg);

  /// One better-response proposal for creator j. Returns true if accepted.
  bool step(int j, Rng& rng);

  /// Utility of creator j under the current profile.
  double utility(int j) const;
  /// Utility creator j would get by playing `strategy` (any vector, not
  /// necessarily feasible) while everyone else stays put.
  double utility_if(int j, const Vec& strategy) const;

  /// Total welfare of the current profile.
  double welfare() const;

  const StrategyProfile& profile() const noexcept { return profile_; }
  StrategyProfile& mutable_profile() noexcept { return profile_; }

 private:
  double utility_of_column(int j, const double* column) const;
  void refresh_creator(int j);

  const GameInstance& instance_;
  Mat u_hat_;         // m x d
  StrategyProfile profile_;
  DynamicsConfig cfg_;
  Mat scores_;        // n x m: scores_(j, i) = sigma(s_j, u_hat_i)
  Mat exp_scores_;    // n x m, softmax_share only
  Vec shift_;         // per-user softmax shift
  mutable Vec column_;
};

/// A single LBR update of creator j; the profile's step counter is unchanged.
StrategyProfile lbr_step(const StrategyProfile& profile, int j, const GameInstance& instance,
                         const EstimatedUsers& estimates, const DynamicsConfig& cfg, Rng& rng);

/// Runs `horizon` rounds in which every creator gets one LBR proposal.
DynamicsTrace run_dynamics(const GameInstance& instance, const EstimatedUsers& estimates,
                           const DynamicsConfig& cfg);
DynamicsTrace run_dynamics(const GameInstance& instance, const EstimatedUsers& estimates,
                           StrategyProfile initial, const DynamicsConfig& cfg);

struct DeviationProbe {
  long samples = 0;
  long strictly_improving = 0;
  double best_gain = 0.0;
};

/// Samples `samples` perturbations s_j + eta g for creator j and counts the
/// ones that strictly raise its utility, scored per cfg.candidate_eval.
DeviationProbe probe_deviations(const GameInstance& instance, const Mat& u_hat,
                                const StrategyProfile& profile, int j, long samples,
                                const DynamicsConfig& cfg, Rng& rng);

}  // namespace c3bv
