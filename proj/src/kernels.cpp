#include "c3bv/kernels.hpp"

#include <algorithm>
#include <numeric>

#include "c3bv/estimator.hpp"

namespace c3bv::kernels {

namespace {

// Fixed block size: partitioning never depends on the number of threads.
constexpr Eigen::Index kRowBlock = 32;

template <class Body>
void for_blocks(Eigen::Index rows, Exec exec, Body&& body) {
  const Eigen::Index blocks = (rows + kRowBlock - 1) / kRowBlock;
  auto run = [&](Eigen::Index b) {
    const Eigen::Index lo = b * kRowBlock;
    const Eigen::Index hi = std::min(rows, lo + kRowBlock);
    for (Eigen::Index i = lo; i < hi; ++i) body(i);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b) run(b);
  } else {
    for (Eigen::Index b = 0; b < blocks; ++b) run(b);
  }
}

double dot_rows(const Mat& a, Eigen::Index i, const Mat& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
  return s;
}

}  // namespace

Mat score_board(const Mat& u_hat, const Mat& strategies, Exec exec) {
  if (u_hat.cols() != strategies.cols()) {
    throw UsageError("score_board: estimate and strategy dimensions differ");
  }
  Mat out(u_hat.rows(), strategies.rows());
  for_blocks(u_hat.rows(), exec, [&](Eigen::Index i) {
    for (Eigen::Index j = 0; j < strategies.rows(); ++j) out(i, j) = dot_rows(u_hat, i, strategies, j);
  });
  return out;
}

std::vector<double> user_utilities(const Mat& users_true, const Mat& u_hat, const Mat& strategies,
                                   const std::vector<double>& attention, Exec exec) {
  if (users_true.rows() != u_hat.rows() || users_true.cols() != u_hat.cols() ||
      u_hat.cols() != strategies.cols()) {
    throw UsageError("user_utilities: shape mismatch");
  }
  const auto n = strategies.rows();
  const auto k = static_cast<Eigen::Index>(attention.size());
  if (k > n) throw UsageError("user_utilities: K exceeds the number of creators");
  std::vector<double> out(static_cast<std::size_t>(users_true.rows()));
  for_blocks(users_true.rows(), exec, [&](Eigen::Index i) {
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) scores[static_cast<std::size_t>(j)] = dot_rows(u_hat, i, strategies, j);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      const double sa = scores[static_cast<std::size_t>(a)];
      const double sb = scores[static_cast<std::size_t>(b)];
      return sa > sb || (sa == sb && a < b);
    });
    double w = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      w += attention[static_cast<std::size_t>(r)] *
           dot_rows(strategies, order[static_cast<std::size_t>(r)], users_true, i);
    }
    out[static_cast<std::size_t>(i)] = w;
  });
  return out;
}

Mat ridge_estimates(const RidgeSolver& solver, const Mat& ratings, Exec exec) {
  Vec probe = Vec::Zero(ratings.cols());
  const auto d = solver.solve(probe).size();
  Mat out(ratings.rows(), d);
  for_blocks(ratings.rows(), exec, [&](Eigen::Index i) {
    const Vec row = ratings.row(i).transpose();
    out.row(i) = solver.solve(row).transpose();
  });
  return out;
}

void nmf_update(const SparseMat& v, const SparseMat& vt, Mat& w, Mat& h, Exec exec) {
  constexpr double kTiny = 1e-16;
  const auto d = w.cols();
  // H <- H .* (V^T W) ./ (H W^T W)
  {
    const Mat wtw = w.transpose() * w;
    Mat next(h.rows(), d);
    for_blocks(h.rows(), exec, [&](Eigen::Index j) {
      for (Eigen::Index c = 0; c < d; ++c) {
        double num = 0.0;
        for (SparseMat::InnerIterator it(v, j); it; ++it) num += it.value() * w(it.index(), c);
        double den = 0.0;
        for (Eigen::Index e = 0; e < d; ++e) den += h(j, e) * wtw(e, c);
        next(j, c) = h(j, c) * num / (den + kTiny);
      }
    });
    h = std::move(next);
  }
  // W <- W .* (V H) ./ (W H^T H)
  {
    const Mat hth = h.transpose() * h;
    Mat next(w.rows(), d);
    for_blocks(w.rows(), exec, [&](Eigen::Index i) {
      for (Eigen::Index c = 0; c < d; ++c) {
        double num = 0.0;
        for (SparseMat::InnerIterator it(vt, i); it; ++it) num += it.value() * h(it.index(), c);
        double den = 0.0;
        for (Eigen::Index e = 0; e < d; ++e) den += w(i, e) * hth(e, c);
        next(i, c) = w(i, c) * num / (den + kTiny);
      }
    });
    w = std::move(next);
  }
}

double nmf_objective(const SparseMat& vt, const Mat& w, const Mat& h, double v_sq_norm, Exec exec) {
  // ||V||^2 - 2 <V, W H^T> + <W^T W, H^T H>
  std::vector<double> cross(static_cast<std::size_t>(w.rows()));
  for_blocks(w.rows(), exec, [&](Eigen::Index i) {
    double s = 0.0;
    for (SparseMat::InnerIterator it(vt, i); it; ++it) s += it.value() * dot_rows(w, i, h, it.index());
    cross[static_cast<std::size_t>(i)] = s;
  });
  const Mat wtw = w.transpose() * w;
  const Mat hth = h.transpose() * h;
  const double gram = wtw.cwiseProduct(hth).sum();
  return std::max(0.0, v_sq_norm - 2.0 * ordered_sum(cross) + gram);
}

double ordered_sum(const std::vector<double>& values) {
  CompensatedSum s;
  for (double x : values) s.add(x);
  return s.value();
}

}  // namespace c3bv::kernels
