#include "c3bv/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace c3bv {

std::vector<int> rank_topk(std::span<const double> scores, int k) {
  const int n = static_cast<int>(scores.size());
  if (k < 0 || k > n) throw UsageError("rank_topk: K must lie in [0, n]");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    return sa > sb || (sa == sb && a < b);
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

std::vector<int> rank_topk(const StrategyProfile& profile, const Vec& u_hat, int k) {
  std::vector<double> scores;
  scores.reserve(profile.strategies.size());
  for (const auto& s : profile.strategies) scores.push_back(match_score(s.vec(), u_hat));
  return rank_topk(scores, k);
}

double user_utility(const StrategyProfile& profile, const Vec& u_true, const Vec& u_hat,
                    const AttentionWeights& attention) {
  const auto top = rank_topk(profile, u_hat, attention.k());
  double w = 0.0;
  for (int r = 0; r < attention.k(); ++r) {
    w += attention[r] * match_score(profile.strategies[static_cast<std::size_t>(top[static_cast<std::size_t>(r)])].vec(), u_true);
  }
  return w;
}

std::vector<double> user_utilities(const StrategyProfile& profile, const Mat& users_true,
                                   const Mat& u_hat, const AttentionWeights& attention, Exec exec) {
  return kernels::user_utilities(users_true, u_hat, profile.matrix(), attention.values(), exec);
}

double total_welfare(const StrategyProfile& profile, const Mat& users_true, const Mat& u_hat,
                     const AttentionWeights& attention, Exec exec) {
  return kernels::ordered_sum(user_utilities(profile, users_true, u_hat, attention, exec));
}

double nash_social_welfare(std::span<const double> per_user_utilities) {
  if (per_user_utilities.empty()) throw UsageError("nash_social_welfare: need at least one user");
  CompensatedSum logs;
  for (double w : per_user_utilities) logs.add(std::log(std::max(w, kNswFloor)));
  return std::exp(logs.value() / static_cast<double>(per_user_utilities.size()));
}

}  // namespace c3bv
