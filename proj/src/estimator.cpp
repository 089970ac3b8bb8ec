#include "c3bv/estimator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace c3bv {

namespace {

double draw_noise(const NoiseModel& noise, Rng& rng) {
  switch (noise.kind) {
    case NoiseModel::Kind::none: return 0.0;
    case NoiseModel::Kind::gaussian: {
      std::normal_distribution<double> dist(0.0, noise.scale);
      return dist(rng);
    }
    case NoiseModel::Kind::uniform: {
      std::uniform_real_distribution<double> dist(-noise.scale, noise.scale);
      return dist(rng);
    }
  }
  return 0.0;
}

double condition_number(const Mat& spd) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(spd, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

RatingMatrixDense generate_ratings(const GameInstance& instance, Rng& rng) {
  RatingMatrixDense out;
  out.values = instance.users() * instance.content_matrix().transpose();
  if (instance.noise().kind != NoiseModel::Kind::none) {
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
        out.values(i, j) += draw_noise(instance.noise(), rng);
      }
    }
  }
  return out;
}

RatingMatrixDense generate_ratings(const GameInstance& instance, std::uint64_t seed) {
  Rng rng(seed);
  auto out = generate_ratings(instance, rng);
  out.generated_from = seed;
  return out;
}

RidgeSolver::RidgeSolver(const Mat& contents, double lambda, SingularPolicy policy)
    : contents_(contents), lambda_used_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("ridge: lambda must be finite and >= 0");
  }
  const auto d = contents_.cols();
  Mat gram = contents_.transpose() * contents_;
  Mat system = gram;
  system.diagonal().array() += lambda;
  condition_ = condition_number(system);
  if (lambda == 0.0 && !(condition_ < kMaxCondition)) {
    if (policy == SingularPolicy::strict) {
      std::ostringstream os;
      os << "ridge: Gram matrix is rank deficient at lambda = 0 (condition number " << condition_
         << ", limit " << kMaxCondition << ")";
      throw RankDeficientError(os.str(), condition_);
    }
    jittered_ = true;
    lambda_used_ = kLambdaJitter;
    system = gram;
    system.diagonal().array() += kLambdaJitter;
    condition_ = condition_number(system);
  }
  llt_.compute(system);
  if (llt_.info() != Eigen::Success) {
    if (lambda_used_ > 0.0 || policy == SingularPolicy::strict) {
      throw RankDeficientError("ridge: Cholesky factorization failed", condition_);
    }
    jittered_ = true;
    lambda_used_ = kLambdaJitter;
    system = gram + kLambdaJitter * Mat::Identity(d, d);
    llt_.compute(system);
    if (llt_.info() != Eigen::Success) {
      throw RankDeficientError("ridge: Cholesky failed after jitter", condition_);
    }
  }
}

Vec RidgeSolver::solve(std::span<const double> ratings_row) const {
  if (static_cast<Eigen::Index>(ratings_row.size()) != contents_.rows()) {
    throw UsageError("ridge: ratings row length differs from the number of contents");
  }
  Eigen::Map<const Vec> r(ratings_row.data(), static_cast<Eigen::Index>(ratings_row.size()));
  const Vec rhs = contents_.transpose() * r;
  return llt_.solve(rhs);
}

Vec RidgeSolver::solve(const Vec& ratings_row) const {
  return solve(std::span<const double>(ratings_row.data(), static_cast<std::size_t>(ratings_row.size())));
}

Vec estimate_user(std::span<const double> ratings_row, const std::vector<UnitNonnegVec>& contents,
                  double lambda) {
  if (contents.empty()) throw UsageError("estimate_user: no contents");
  Mat rows(static_cast<Eigen::Index>(contents.size()), contents.front().dim());
  for (std::size_t j = 0; j < contents.size(); ++j) {
    rows.row(static_cast<Eigen::Index>(j)) = contents[j].vec().transpose();
  }
  return RidgeSolver(rows, lambda).solve(ratings_row);
}

EstimatedUsers estimate_users(const GameInstance& instance, const RatingMatrixDense& ratings,
                              const EstimateOptions& options) {
  const Mat& r = ratings.values;
  if (r.rows() != instance.num_users() || r.cols() != instance.num_contents()) {
    throw UsageError("estimate_users: rating matrix shape does not match the instance");
  }
  RidgeSolver solver(instance.content_matrix(), instance.lambda(), options.singular);
  EstimatedUsers out;
  out.lambda_used = solver.lambda_used();
  out.jittered = solver.jittered();
  out.condition = solver.condition();
  // All users share the factorization; only the right-hand side varies.
  out.u_hat.resize(r.rows(), instance.dim());
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    const Vec row = r.row(i).transpose();
    out.u_hat.row(i) = solver.solve(row).transpose();
  }
  if (options.clamp_nonneg) out.u_hat = out.u_hat.cwiseMax(0.0);
  return out;
}

}  // namespace c3bv
