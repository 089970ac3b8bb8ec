#pragma once

#include <span>
#include <vector>

#include "c3bv/core.hpp"
#include "c3bv/kernels.hpp"

namespace c3bv {

inline constexpr double kNswFloor = 1e-9;

/// Indices of the K largest scores, descending; ties go to the lower index.
std::vector<int> rank_topk(std::span<const double> scores, int k);
std::vector<int> rank_topk(const StrategyProfile& profile, const Vec& u_hat, int k);

/// W_i: items ranked by the estimate u_hat, valued by the true preference.
double user_utility(const StrategyProfile& profile, const Vec& u_true, const Vec& u_hat,
                    const AttentionWeights& attention);

/// Per-user utilities for a whole population (rows of `users_true` / `u_hat`).
std::vector<double> user_utilities(const StrategyProfile& profile, const Mat& users_true,
                                   const Mat& u_hat, const AttentionWeights& attention,
                                   Exec exec = Exec::serial);

/// Total user welfare: the sum of W_i over all users.
double total_welfare(const StrategyProfile& profile, const Mat& users_true, const Mat& u_hat,
                     const AttentionWeights& attention, Exec exec = Exec::serial);

/// Geometric mean of max(W_i, kNswFloor).
double nash_social_welfare(std::span<const double> per_user_utilities);

}  // namespace c3bv
