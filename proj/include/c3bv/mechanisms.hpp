#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c3bv/core.hpp"
#include "c3bv/rng.hpp"

namespace c3bv {

/// Estimated matching scores sigma(s_j, u_hat_i): m x n, users by creators.
struct ScoreBoard {
  Mat scores;

  Eigen::Index num_users() const noexcept { return scores.rows(); }
  Eigen::Index num_creators() const noexcept { return scores.cols(); }
};

/// Builds the board from estimates (m x d) and strategies (n x d).
ScoreBoard make_score_board(const Mat& u_hat, const Mat& strategies);

/// Zero-based rank of creator j among `scores` (descending, ties to the lower
/// creator index).
int rank_of(int j, std::span<const double> scores);

/// Reward paid to creator j by one user given that user's score row.
///
///   exposure_topk    r_rank when rank < K, else 0
///   engagement_topk  r_rank * max(sigma_j, 0) when rank < K, else 0
///   softmax_share    exp(beta sigma_j) / sum_t exp(beta sigma_t)
///   winner_value     max(sigma_j, 0) when rank == 0, else 0
double per_user_reward(int j, std::span<const double> scores, const MechanismId& mech,
                       const AttentionWeights& attention);

/// Creator utility pi_j: per-user rewards summed over all users on the board.
double creator_utility(int j, const ScoreBoard& board, const MechanismId& mech,
                       const AttentionWeights& attention);

/// Per-user reward callback for the monotonicity checker, so arbitrary
/// (including deliberately broken) mechanisms can be audited.
using RewardFn = std::function<double(int j, std::span<const double> scores)>;

struct MonotonicityReport {
  bool passed = true;
  int trials = 0;
  // Populated on failure.
  std::vector<double> scores_before;
  std::vector<double> scores_after;
  int creator = -1;
  double reward_before = 0.0;
  double reward_after = 0.0;

  std::string describe() const;
};

/// Randomized individual-monotonicity audit: sample a score vector, raise one
/// creator's own score, and require its reward not to drop.
MonotonicityReport check_individual_monotonicity(const RewardFn& reward, int trials, Rng& rng,
                                                 int max_creators = 12);
MonotonicityReport check_individual_monotonicity(const MechanismId& mech, int trials, Rng& rng);

}  // namespace c3bv
