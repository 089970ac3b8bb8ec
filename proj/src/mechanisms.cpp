#include "c3bv/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace c3bv {

ScoreBoard make_score_board(const Mat& u_hat, const Mat& strategies) {
  if (u_hat.cols() != strategies.cols()) {
    throw UsageError("score board: estimate and strategy dimensions differ");
  }
  ScoreBoard board;
  board.scores.resize(u_hat.rows(), strategies.rows());
  for (Eigen::Index j = 0; j < strategies.rows(); ++j) {
    for (Eigen::Index i = 0; i < u_hat.rows(); ++i) {
      board.scores(i, j) = u_hat.row(i).dot(strategies.row(j));
    }
  }
  return board;
}

int rank_of(int j, std::span<const double> scores) {
  const double own = scores[static_cast<std::size_t>(j)];
  int rank = 0;
  for (int t = 0; t < static_cast<int>(scores.size()); ++t) {
    const double s = scores[static_cast<std::size_t>(t)];
    if (s > own || (s == own && t < j)) ++rank;
  }
  return rank;
}

double per_user_reward(int j, std::span<const double> scores, const MechanismId& mech,
                       const AttentionWeights& attention) {
  if (j < 0 || j >= static_cast<int>(scores.size())) {
    throw UsageError("per_user_reward: creator index out of range");
  }
  const double own = scores[static_cast<std::size_t>(j)];
  switch (mech.kind) {
    case MechanismId::Kind::exposure_topk: {
      const int rank = rank_of(j, scores);
      return rank < attention.k() ? attention[rank] : 0.0;
    }
    case MechanismId::Kind::engagement_topk: {
      const int rank = rank_of(j, scores);
      return rank < attention.k() ? attention[rank] * std::max(own, 0.0) : 0.0;
    }
    case MechanismId::Kind::softmax_share: {
      // 1 / (1 + sum_{t != j} e^{beta (s_t - s_j)}): each step is monotone
      // under rounding, so the share never drops when s_j rises by an ulp.
      double rest = 0.0;
      for (std::size_t t = 0; t < scores.size(); ++t) {
        if (static_cast<int>(t) != j) rest += std::exp(mech.beta * (scores[t] - own));
      }
      return 1.0 / (1.0 + rest);
    }
    case MechanismId::Kind::winner_value:
      return rank_of(j, scores) == 0 ? std::max(own, 0.0) : 0.0;
  }
  throw UsageError("per_user_reward: unknown mechanism");
}

double creator_utility(int j, const ScoreBoard& board, const MechanismId& mech,
                       const AttentionWeights& attention) {
  if (j < 0 || j >= board.num_creators()) {
    throw UsageError("creator_utility: creator index out of range");
  }
  std::vector<double> row(static_cast<std::size_t>(board.num_creators()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < board.num_users(); ++i) {
    for (Eigen::Index t = 0; t < board.num_creators(); ++t) {
      row[static_cast<std::size_t>(t)] = board.scores(i, t);
    }
    total += per_user_reward(j, row, mech, attention);
  }
  return total;
}

std::string MonotonicityReport::describe() const {
  std::ostringstream os;
  if (passed) {
    os << "pass (" << trials << " trials)";
    return os.str();
  }
  os << "fail: creator " << creator << " reward " << reward_before << " -> " << reward_after
     << " after raising its score from " << scores_before[static_cast<std::size_t>(creator)]
     << " to " << scores_after[static_cast<std::size_t>(creator)] << "; scores [";
  for (std::size_t t = 0; t < scores_before.size(); ++t) {
    os << (t ? ", " : "") << scores_before[t];
  }
  os << "]";
  return os.str();
}

MonotonicityReport check_individual_monotonicity(const RewardFn& reward, int trials, Rng& rng,
                                                 int max_creators) {
  if (trials < 1) throw UsageError("monotonicity check: trials must be >= 1");
  MonotonicityReport report;
  std::uniform_int_distribution<int> n_dist(2, std::max(2, max_creators));
  std::uniform_real_distribution<double> score_dist(-1.0, 2.0);
  std::uniform_real_distribution<double> bump_dist(0.0, 1.0);
  std::uniform_int_distribution<int> style_dist(0, 2);
  for (int trial = 0; trial < trials; ++trial) {
    const int n = n_dist(rng);
    std::vector<double> before(static_cast<std::size_t>(n));
    for (double& s : before) s = score_dist(rng);
    // Seed ties deliberately: they are the common case at equilibrium.
    if (style_dist(rng) == 0) before[1] = before[0];
    const int t = std::uniform_int_distribution<int>(0, n - 1)(rng);
    std::vector<double> after = before;
    double& raised = after[static_cast<std::size_t>(t)];
    switch (style_dist(rng)) {
      case 0: raised += bump_dist(rng); break;
      case 1: raised = std::nextafter(raised, 1e300); break;
      default: {
        // Jump exactly onto the next-higher competitor's score, if any.
        double target = raised + bump_dist(rng);
        for (double s : before) {
          if (s > raised) target = std::min(target, s);
        }
        raised = target;
      }
    }
    const double r0 = reward(t, before);
    const double r1 = reward(t, after);
    ++report.trials;
    if (r1 < r0) {
      report.passed = false;
      report.scores_before = std::move(before);
      report.scores_after = std::move(after);
      report.creator = t;
      report.reward_before = r0;
      report.reward_after = r1;
      return report;
    }
  }
  return report;
}

MonotonicityReport check_individual_monotonicity(const MechanismId& mech, int trials, Rng& rng) {
  if (trials < 1) throw UsageError("monotonicity check: trials must be >= 1");
  // Trials are spread over K = 1..12 so top-K cutoffs at every position get exercised.
  constexpr int kMaxK = 12;
  MonotonicityReport total;
  for (int k = 1; k <= kMaxK; ++k) {
    const int share = trials / kMaxK + (k <= trials % kMaxK ? 1 : 0);
    if (share == 0) continue;
    const auto attention = AttentionWeights::log_discount(k);
    auto reward = [&](int j, std::span<const double> scores) {
      const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), scores.size());
      std::vector<double> r(attention.values().begin(),
                            attention.values().begin() + static_cast<std::ptrdiff_t>(kk));
      return per_user_reward(j, scores, mech, AttentionWeights(std::move(r)));
    };
    auto part = check_individual_monotonicity(reward, share, rng);
    total.trials += part.trials;
    if (!part.passed) {
      part.trials = total.trials;
      return part;
    }
  }
  return total;
}

}  // namespace c3bv
