#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "c3bv/core.hpp"
#include "c3bv/rng.hpp"

namespace c3bv {

/// Fully observed rating matrix R = U V^T + noise (m x n).
struct RatingMatrixDense {
  Mat values;
  std::uint64_t generated_from = 0;
};

struct EstimatedUsers {
  Mat u_hat;  // m x d, one estimate per row
  double lambda_used = 0.0;
  bool jittered = false;  // lambda = 0 was singular and solved at kLambdaJitter instead
  double condition = 0.0;  // condition number of the regularized Gram matrix
};

inline constexpr double kMaxCondition = 1e12;
inline constexpr double kLambdaJitter = 1e-10;

/// Draws R_ij = u_i . v_j + eps_ij, row by row.
RatingMatrixDense generate_ratings(const GameInstance& instance, Rng& rng);
RatingMatrixDense generate_ratings(const GameInstance& instance, std::uint64_t seed);

/// Shared factorization of (sum_j v_j v_j^T + lambda I) for one content set.
///
/// With lambda = 0 and a singular Gram matrix the strict policy throws
/// RankDeficientError; the jitter policy solves at kLambdaJitter instead and
/// reports it through jittered().
class RidgeSolver {
 public:
  enum class SingularPolicy { strict, jitter };

  RidgeSolver(const Mat& contents, double lambda, SingularPolicy policy = SingularPolicy::strict);

  /// Ridge estimate for one user's rating row (length n).
  Vec solve(std::span<const double> ratings_row) const;
  Vec solve(const Vec& ratings_row) const;

  double lambda_used() const noexcept { return lambda_used_; }
  bool jittered() const noexcept { return jittered_; }
  double condition() const noexcept { return condition_; }

 private:
  Mat contents_;  // n x d
  Eigen::LLT<Mat> llt_;
  double lambda_used_;
  bool jittered_ = false;
  double condition_ = 0.0;
};

/// Closed-form ridge estimate for a single user.
Vec estimate_user(std::span<const double> ratings_row, const std::vector<UnitNonnegVec>& contents,
                  double lambda);

struct EstimateOptions {
  bool clamp_nonneg = false;
  RidgeSolver::SingularPolicy singular = RidgeSolver::SingularPolicy::strict;
};

/// Estimates every user against the instance's contents at instance.lambda().
EstimatedUsers estimate_users(const GameInstance& instance, const RatingMatrixDense& ratings,
                              const EstimateOptions& options = {});

}  // namespace c3bv
