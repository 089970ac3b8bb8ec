#include <benchmark/benchmark.h>

#include <random>

#include "c3bv/kernels.hpp"
#include "c3bv/prent.hpp"

using namespace c3bv;

namespace {

Mat random_nonneg(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void BM_ScoreBoard(benchmark::State& state) {
  const Mat u = random_nonneg(943, 16, 1);
  const Mat s = random_nonneg(10, 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::score_board(u, s, exec_of(state)));
}

void BM_UserUtilities(benchmark::State& state) {
  const Mat u = random_nonneg(943, 16, 1);
  const Mat uh = random_nonneg(943, 16, 3);
  const Mat s = random_nonneg(10, 16, 2);
  const auto r = AttentionWeights::log_discount(5).values();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::user_utilities(u, uh, s, r, exec_of(state)));
}

void BM_NmfUpdate(benchmark::State& state) {
  Rng rng(4);
  std::uniform_int_distribution<int> ui(0, 942), ii(0, 1681);
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> t;
  for (int e = 0; e < 100000; ++e) t.emplace_back(ui(rng), ii(rng), 1.0 + e % 5);
  kernels::SparseMat v(943, 1682);
  v.setFromTriplets(t.begin(), t.end(), [](double, double b) { return b; });
  const kernels::SparseMat vt = v.transpose();
  Mat w = random_nonneg(943, 16, 5);
  Mat h = random_nonneg(1682, 16, 6);
  for (auto _ : state) kernels::nmf_update(v, vt, w, h, exec_of(state));
}

void BM_MonteCarlo(benchmark::State& state) {
  const auto p = prent::Params::make(9, 1, 0.8, 0.6, 0.2);
  const auto r = AttentionWeights::log_discount(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        prent::expected_welfare_strategic(0.5, p, r, 100000, 7, exec_of(state)));
  }
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_ScoreBoard)->Arg(0)->Arg(1);
BENCHMARK(BM_UserUtilities)->Arg(0)->Arg(1);
BENCHMARK(BM_NmfUpdate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
