#include <doctest.h>

#include <random>

#include "c3bv/envgen.hpp"
#include "c3bv/estimator.hpp"
#include "c3bv/prent.hpp"
#include "oracles.hpp"

using namespace c3bv;

namespace {

GameInstance prent_instance(double lambda, NoiseModel noise) {
  Mat users(1, 2);
  users << 0.8, 0.6;
  std::vector<UnitNonnegVec> contents;
  for (int i = 0; i < 9; ++i) contents.emplace_back(Vec::Unit(2, 0));
  contents.emplace_back(Vec::Unit(2, 1));
  return GameInstance(lambda, users, contents, noise, {}, AttentionWeights({1.0}), 7);
}

}  // namespace

TEST_SUITE("estimator") {
  TEST_CASE("zero noise ratings are exact inner products") {
    const auto g = prent_instance(1.0, NoiseModel::none());
    const auto r = generate_ratings(g, 1);
    CHECK(r.values(0, 0) == 0.8);
    CHECK(r.values(0, 9) == 0.6);
  }

  TEST_CASE("uniform noise stays within its support") {
    const auto g = prent_instance(1.0, NoiseModel::uniform(0.05));
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto r = generate_ratings(g, s);
      const Mat clean = g.users() * g.content_matrix().transpose();
      CHECK((r.values - clean).cwiseAbs().maxCoeff() <= 0.05);
    }
  }

  TEST_CASE("same seed gives identical ratings") {
    const auto g = prent_instance(1.0, NoiseModel::gaussian(0.3));
    CHECK(generate_ratings(g, 42).values == generate_ratings(g, 42).values);
    CHECK(generate_ratings(g, 42).values != generate_ratings(g, 43).values);
  }

  TEST_CASE("two-group basis, zero noise, lambda 1") {
    const auto g = prent_instance(1.0, NoiseModel::none());
    const auto est = estimate_users(g, generate_ratings(g, 0));
    CHECK(est.u_hat(0, 0) == doctest::Approx(0.72).epsilon(1e-14));
    CHECK(est.u_hat(0, 1) == doctest::Approx(0.30).epsilon(1e-14));
  }

  TEST_CASE("scalar least squares") {
    const std::vector<double> row{3.0};
    const std::vector<UnitNonnegVec> v{UnitNonnegVec(Vec::Ones(1))};
    CHECK(estimate_user(row, v, 0.0)[0] == doctest::Approx(3.0).epsilon(1e-15));
  }

  TEST_CASE("huge lambda shrinks to zero") {
    const auto g = prent_instance(1e9, NoiseModel::none());
    const auto est = estimate_users(g, generate_ratings(g, 0));
    CHECK(est.u_hat.row(0).norm() < 1e-6);
  }

  TEST_CASE("singular Gram at lambda 0") {
    const std::vector<double> row{1.0, 2.0};
    Vec e(3);
    e << 1, 0, 0;
    const std::vector<UnitNonnegVec> v{UnitNonnegVec(e), UnitNonnegVec(e)};
    try {
      estimate_user(row, v, 0.0);
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& err) {
      CHECK(err.condition() >= kMaxCondition);
      CHECK(std::string(err.what()).find("condition number") != std::string::npos);
    }
    CHECK_NOTHROW(estimate_user(row, v, 0.1));
    RidgeSolver jitter(Mat(Eigen::Map<const Mat>(e.data(), 1, 3).replicate(2, 1)), 0.0,
                       RidgeSolver::SingularPolicy::jitter);
    CHECK(jitter.jittered());
    CHECK(jitter.lambda_used() == kLambdaJitter);
    CHECK(jitter.solve(Vec(Vec::Ones(2)))[0] == doctest::Approx(1.0));
  }

  TEST_CASE("closed form matches iterative descent on the loss") {
    Rng rng(2024);
    std::uniform_int_distribution<int> dd(1, 4), nn(1, 6);
    std::uniform_real_distribution<double> pos(0.0, 1.0), rate(-1.0, 3.0);
    const double lambdas[] = {0.1, 1.0, 10.0};
    for (int t = 0; t < 60; ++t) {
      const int d = dd(rng);
      const int n = nn(rng);
      std::vector<UnitNonnegVec> contents;
      std::vector<Vec> raw;
      for (int j = 0; j < n; ++j) {
        Vec x(d);
        for (int c = 0; c < d; ++c) x[c] = pos(rng);
        contents.push_back(project_nonneg_sphere(x));
        raw.push_back(contents.back().vec());
      }
      std::vector<double> row(static_cast<std::size_t>(n));
      for (auto& r : row) r = rate(rng);
      const double lambda = lambdas[t % 3];
      const Vec closed = estimate_user(row, contents, lambda);
      const Vec iter = oracle::ridge_by_descent(row, raw, lambda);
      CHECK((closed - iter).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  TEST_CASE("shrinkage is monotone in lambda") {
    MarketOptions o;
    o.m = 30;
    o.seed = 5;
    const auto market = build_synthetic_market(o).instance;
    const auto ratings = generate_ratings(market, 3);
    EstimateOptions opt{false, RidgeSolver::SingularPolicy::jitter};
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0}) {
      const auto est = estimate_users(market.with_lambda(lambda), ratings, opt);
      const double worst = est.u_hat.rowwise().norm().maxCoeff();
      if (std::isfinite(prev)) {
        for (Eigen::Index i = 0; i < est.u_hat.rows(); ++i) CHECK(est.u_hat.row(i).norm() <= prev + 1e-9);
      }
      prev = worst;
    }
  }

  TEST_CASE("two-group coordinates follow the group-mean formula") {
    const auto p = prent::Params::make(9, 1, 0.8, 0.6, 0.2);
    for (double lambda : {0.0, 0.3, 2.0}) {
      for (std::uint64_t s = 0; s < 20; ++s) {
        const auto g = prent_instance(lambda, NoiseModel::uniform(0.2));
        const auto ratings = generate_ratings(g, s);
        const auto est = estimate_users(g, ratings);
        prent::NoiseRealization e;
        for (int j = 0; j < 9; ++j) e.trend += ratings.values(0, j) - 0.8;
        e.trend /= 9;
        e.niche = ratings.values(0, 9) - 0.6;
        const auto c = prent::estimate_coords(lambda, p, e);
        CHECK(est.u_hat(0, 0) == doctest::Approx(c.trend).epsilon(1e-12));
        CHECK(est.u_hat(0, 1) == doctest::Approx(c.niche).epsilon(1e-12));
        CHECK(prent::f_gap(lambda, p, e) ==
              doctest::Approx(est.u_hat(0, 0) - est.u_hat(0, 1)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("clamping option") {
    const auto g = prent_instance(0.0, NoiseModel::uniform(0.1));
    Mat users(1, 2);
    RatingMatrixDense r;
    r.values = Mat::Constant(1, 10, -0.5);
    const auto raw = estimate_users(g, r);
    const auto clamped = estimate_users(g, r, {true, RidgeSolver::SingularPolicy::strict});
    CHECK(raw.u_hat.minCoeff() < 0.0);
    CHECK(clamped.u_hat.minCoeff() == 0.0);
  }
}
