#pragma once

// Data-parallel kernels. Every kernel has a serial reference path and an
// OpenMP path; both evaluate each output element with the same arithmetic in
// the same order, so their results are bitwise identical and independent of
// the thread count. Reductions go through fixed-size blocks combined in block
// order for the same reason.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Sparse>

#include "c3bv/core.hpp"
#include "c3bv/rng.hpp"

namespace c3bv {

class RidgeSolver;

enum class Exec { serial, parallel };

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean and standard error of a Monte Carlo estimate.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

namespace kernels {

inline constexpr long kMcBatch = 4096;

/// sigma(s_j, u_hat_i) for all pairs: m x n.
Mat score_board(const Mat& u_hat, const Mat& strategies, Exec exec);

/// Per-user utility W_i: top-K by estimated score, valued with the true
/// preference. Ties in the ranking go to the lower creator index.
std::vector<double> user_utilities(const Mat& users_true, const Mat& u_hat, const Mat& strategies,
                                   const std::vector<double>& attention, Exec exec);

/// Ridge estimates for every rating row (m x d).
Mat ridge_estimates(const RidgeSolver& solver, const Mat& ratings, Exec exec);

using SparseMat = Eigen::SparseMatrix<double, Eigen::ColMajor, std::ptrdiff_t>;

/// One Lee-Seung multiplicative update for V ~ W H^T (Frobenius loss, unobserved
/// entries are zeros). `v` is m x n, `vt` its transpose; W is m x d, H is n x d.
void nmf_update(const SparseMat& v, const SparseMat& vt, Mat& w, Mat& h, Exec exec);

/// ||V - W H^T||_F^2 expanded so no m x n temporary is formed.
double nmf_objective(const SparseMat& vt, const Mat& w, const Mat& h, double v_sq_norm, Exec exec);

/// In-order sum of per-element values with compensated accumulation.
double ordered_sum(const std::vector<double>& values);

/// Monte Carlo mean of `sample(rng)` over n draws. Draws are grouped into
/// fixed batches of kMcBatch with per-batch streams derive_seed(seed, {b}),
/// and batch partial sums are combined in batch order.
template <class SampleFn>
McEstimate monte_carlo(long n, std::uint64_t seed, SampleFn&& sample, Exec exec) {
  if (n < 1) throw UsageError("monte_carlo: need at least one sample");
  struct Partial {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  const long batches = (n + kMcBatch - 1) / kMcBatch;
  std::vector<Partial> parts(static_cast<std::size_t>(batches));
  auto run_batch = [&](long b) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    const long lo = b * kMcBatch;
    const long hi = std::min(n, lo + kMcBatch);
    Partial p;
    for (long i = lo; i < hi; ++i) {
      const double x = sample(rng);
      ++p.count;
      const double delta = x - p.mean;
      p.mean += delta / static_cast<double>(p.count);
      p.m2 += delta * (x - p.mean);
    }
    parts[static_cast<std::size_t>(b)] = p;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long b = 0; b < batches; ++b) run_batch(b);
  } else {
    for (long b = 0; b < batches; ++b) run_batch(b);
  }
  // Chan et al. pairwise merge, always in batch order.
  Partial acc;
  for (const Partial& p : parts) {
    if (acc.count == 0) {
      acc = p;
      continue;
    }
    const double na = static_cast<double>(acc.count);
    const double nb = static_cast<double>(p.count);
    const double delta = p.mean - acc.mean;
    const double total = na + nb;
    acc.mean += delta * nb / total;
    acc.m2 += p.m2 + delta * delta * na * nb / total;
    acc.count += p.count;
  }
  McEstimate est;
  est.samples = n;
  est.mean = acc.mean;
  if (n > 1) {
    est.std_error = std::sqrt(std::max(0.0, acc.m2) / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return est;
}

}  // namespace kernels
}  // namespace c3bv
