#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "c3bv/core.hpp"
#include "c3bv/datasets.hpp"
#include "c3bv/kernels.hpp"

namespace c3bv {

struct NmfOptions {
  int d = 16;
  int max_iter = 500;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

struct NmfFactors {
  Mat w;  // users x d, >= 0
  Mat h;  // items x d, >= 0
  int d = 0;
  std::uint64_t seed = 0;
  int max_iter = 0;
  double tol = 0.0;
  int iterations = 0;
  bool converged = false;           // relative change fell below tol before max_iter
  double objective = 0.0;           // final ||V - W H^T||_F^2
  double relative_error = 0.0;      // ||V - W H^T||_F / ||V||_F
  std::vector<double> objective_history;  // objective before the first and after every update
};

/// Multiplicative-update NMF of the zero-filled users x items matrix.
NmfFactors factorize_nmf(const RatingTable& table, const NmfOptions& options = {});
NmfFactors factorize_nmf(const kernels::SparseMat& v, const NmfOptions& options = {});

/// Writes W.csv, H.csv and manifest.json into `dir` (created if needed).
void save_factors(const NmfFactors& factors, const std::filesystem::path& dir);
NmfFactors load_factors(const std::filesystem::path& dir);

}  // namespace c3bv
