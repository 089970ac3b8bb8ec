#pragma once

// Closed-form analysis of the two-group (trend / niche) single-user game:
// the estimate gap F, the non-strategic optimal-regularization bounds, the
// strategic welfare gradient and its upper bound, and Monte Carlo estimates
// of both expected welfares under i.i.d. uniform rating noise.

#include <cstdint>
#include <optional>

#include "c3bv/core.hpp"
#include "c3bv/kernels.hpp"
#include "c3bv/rng.hpp"

namespace c3bv::prent {

struct Params {
  int n_trend = 9;
  int n_niche = 1;
  double theta_trend = 0.8;
  double theta_niche = 0.6;
  double e_bar = 0.1;

  /// Validates the group sizes, positivity, and the noise bound
  /// E_bar < (N_T - N_N) / (N_T + N_N) * min(theta_T, theta_N).
  static Params make(int n_trend, int n_niche, double theta_trend, double theta_niche,
                     double e_bar);

  double noise_bound() const;
};

/// Group-mean noises (eps_bar_T, eps_bar_N).
struct NoiseRealization {
  double trend = 0.0;
  double niche = 0.0;
};

/// Coordinates of the ridge estimate on (v_T, v_N):
/// N (theta + eps_bar) / (N + lambda) for each group.
struct EstimateCoords {
  double trend;
  double niche;
};
EstimateCoords estimate_coords(double lambda, const Params& p, const NoiseRealization& e);

/// F(lambda) = u_hat(lambda) . (v_T - v_N).
double f_gap(double lambda, const Params& p, const NoiseRealization& e);
/// dF / dlambda.
double f_gap_derivative(double lambda, const Params& p, const NoiseRealization& e);

/// Root of F on [lo, hi] by bisection, if F changes sign there.
std::optional<double> f_gap_root(const Params& p, const NoiseRealization& e, double lo = 0.0,
                                 double hi = 1e6, double tol = 1e-10);

/// Lower bound on the non-strategic optimum for a trend-preferring user
/// (theta_T > theta_N). Zero when E_bar <= (theta_T - theta_N) / 2.
double lambda_non_lower(const Params& p);

/// Upper bound on the non-strategic optimum for a niche-preferring user
/// (theta_T < theta_N); may be +infinity.
double lambda_non_upper(const Params& p);

/// A(lambda): ratio of the trend to the niche estimate coordinate.
double a_ratio(double lambda, const Params& p, const NoiseRealization& e);
/// B(lambda) = A (theta_T / theta_N - A) / (A^2 + 1)^{3/2}.
double b_term(double lambda, const Params& p, const NoiseRealization& e);

/// Deterministic prefactor of the strategic welfare gradient:
/// sum_k r_k (N_T - N_N) theta_N / ((N_T + lambda)(N_N + lambda)).
double gradient_prefactor(double lambda, const Params& p, const AttentionWeights& attention);

/// Upper bound lambda_str^U for a given alpha in (0, 0.5); nullopt when the
/// closed form's denominator is not positive (N_T too small).
std::optional<double> lambda_str_upper(const Params& p, double alpha);

/// Draws all N_T + N_N i.i.d. U(-E_bar, E_bar) item noises and returns the
/// group means.
NoiseRealization sample_noise(const Params& p, Rng& rng);

/// Welfare of the initial (static) contents for one noise draw: the top slot
/// goes to the trend group when F >= 0.
double nonstrategic_welfare(double lambda, const Params& p, const NoiseRealization& e,
                            const AttentionWeights& attention);

/// Welfare at the symmetric equilibrium for one noise draw: the cosine of the
/// estimate with the true preference, weighted by sum_k r_k.
double strategic_welfare(double lambda, const Params& p, const NoiseRealization& e,
                         const AttentionWeights& attention);

McEstimate expected_welfare_nonstrategic(double lambda, const Params& p,
                                         const AttentionWeights& attention, long samples,
                                         std::uint64_t seed, Exec exec = Exec::parallel);

McEstimate expected_welfare_strategic(double lambda, const Params& p,
                                      const AttentionWeights& attention, long samples,
                                      std::uint64_t seed, Exec exec = Exec::parallel);

/// Monte Carlo estimate of g(lambda) = prefactor * E[B(lambda)].
McEstimate welfare_gradient_strategic(double lambda, const Params& p,
                                      const AttentionWeights& attention, long samples,
                                      std::uint64_t seed, Exec exec = Exec::parallel);

/// Probability that the trend group wins the top slot, P(lambda).
McEstimate trend_probability(double lambda, const Params& p, long samples, std::uint64_t seed,
                             Exec exec = Exec::parallel);

}  // namespace c3bv::prent
