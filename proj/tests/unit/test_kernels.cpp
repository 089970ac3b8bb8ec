#include <doctest.h>

#include <random>

#include "c3bv/estimator.hpp"
#include "c3bv/kernels.hpp"

using namespace c3bv;

namespace {

Mat uniform_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("serial and parallel paths agree bitwise") {
    Rng rng(21);
    const Mat users = uniform_mat(rng, 500, 6);
    const Mat u_hat = uniform_mat(rng, 500, 6, -0.2, 1.0);
    Mat s = uniform_mat(rng, 12, 6);
    // Duplicate strategies exercise the tie rule.
    s.row(3) = s.row(7);
    CHECK(kernels::score_board(u_hat, s, Exec::serial) == kernels::score_board(u_hat, s, Exec::parallel));
    const std::vector<double> att{1.0, 0.63, 0.5};
    CHECK(kernels::user_utilities(users, u_hat, s, att, Exec::serial) ==
          kernels::user_utilities(users, u_hat, s, att, Exec::parallel));

    const RidgeSolver solver(s, 0.3);
    const Mat ratings = uniform_mat(rng, 500, 12);
    CHECK(kernels::ridge_estimates(solver, ratings, Exec::serial) ==
          kernels::ridge_estimates(solver, ratings, Exec::parallel));

    auto draw = [](Rng& r) { return std::normal_distribution<double>(1.0, 2.0)(r); };
    const auto a = kernels::monte_carlo(20000, 5, draw, Exec::serial);
    const auto b = kernels::monte_carlo(20000, 5, draw, Exec::parallel);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean == doctest::Approx(1.0).epsilon(0.05));
    CHECK(a.std_error == doctest::Approx(2.0 / std::sqrt(20000.0)).epsilon(0.05));
  }

  TEST_CASE("nmf update agrees across execution modes") {
    Rng rng(3);
    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> trip;
    std::uniform_int_distribution<int> ui(0, 79), ii(0, 119);
    for (int e = 0; e < 900; ++e) trip.emplace_back(ui(rng), ii(rng), 1.0 + e % 5);
    kernels::SparseMat v(80, 120);
    v.setFromTriplets(trip.begin(), trip.end(), [](double, double b) { return b; });
    const kernels::SparseMat vt = v.transpose();
    Mat w1 = uniform_mat(rng, 80, 4), h1 = uniform_mat(rng, 120, 4);
    Mat w2 = w1, h2 = h1;
    for (int it = 0; it < 5; ++it) {
      kernels::nmf_update(v, vt, w1, h1, Exec::serial);
      kernels::nmf_update(v, vt, w2, h2, Exec::parallel);
    }
    CHECK(w1 == w2);
    CHECK(h1 == h2);
    const double vsq = v.squaredNorm();
    const double o1 = kernels::nmf_objective(vt, w1, h1, vsq, Exec::serial);
    CHECK(o1 == kernels::nmf_objective(vt, w1, h1, vsq, Exec::parallel));
    const Mat dense = Mat(v) - w1 * h1.transpose();
    CHECK(o1 == doctest::Approx(dense.squaredNorm()).epsilon(1e-9));
  }

  TEST_CASE("compensated summation") {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1000.0);
    CHECK(kernels::ordered_sum({0.1, 0.2, 0.3}) == doctest::Approx(0.6).epsilon(1e-16));
    CHECK_THROWS_AS(kernels::monte_carlo(0, 1, [](Rng&) { return 0.0; }, Exec::serial), UsageError);
  }
}
