#include "c3bv/prent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace c3bv::prent {

Params Params::make(int n_trend, int n_niche, double theta_trend, double theta_niche,
                    double e_bar) {
  if (n_niche < 1 || n_trend < 2 || n_trend <= n_niche) {
    throw UsageError("PreNT: need N_T >= 2, N_N >= 1 and N_T > N_N");
  }
  if (!(theta_trend > 0.0) || !(theta_niche > 0.0)) {
    throw UsageError("PreNT: preference strengths must be positive");
  }
  if (!(e_bar > 0.0)) throw UsageError("PreNT: E_bar must be positive");
  Params p{n_trend, n_niche, theta_trend, theta_niche, e_bar};
  if (!(e_bar < p.noise_bound())) {
    std::ostringstream os;
    os << "PreNT: E_bar = " << e_bar << " violates the noise bound " << p.noise_bound();
    throw UsageError(os.str());
  }
  return p;
}

double Params::noise_bound() const {
  return static_cast<double>(n_trend - n_niche) / static_cast<double>(n_trend + n_niche) *
         std::min(theta_trend, theta_niche);
}

EstimateCoords estimate_coords(double lambda, const Params& p, const NoiseRealization& e) {
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  return {nt * (p.theta_trend + e.trend) / (nt + lambda),
          nn * (p.theta_niche + e.niche) / (nn + lambda)};
}

double f_gap(double lambda, const Params& p, const NoiseRealization& e) {
  if (!(lambda >= 0.0)) throw UsageError("f_gap: lambda must be >= 0");
  const auto c = estimate_coords(lambda, p, e);
  return c.trend - c.niche;
}

double f_gap_derivative(double lambda, const Params& p, const NoiseRealization& e) {
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  return -nt * (p.theta_trend + e.trend) / ((nt + lambda) * (nt + lambda)) +
         nn * (p.theta_niche + e.niche) / ((nn + lambda) * (nn + lambda));
}

std::optional<double> f_gap_root(const Params& p, const NoiseRealization& e, double lo, double hi,
                                 double tol) {
  double flo = f_gap(lo, p, e);
  const double fhi = f_gap(hi, p, e);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) return std::nullopt;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fmid = f_gap(mid, p, e);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double lambda_non_lower(const Params& p) {
  if (!(p.theta_trend > p.theta_niche)) {
    throw UsageError("lambda_non_lower: requires a trend-preferring user (theta_T > theta_N)");
  }
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  if (p.e_bar > (p.theta_trend - p.theta_niche) / 2.0) {
    return nt * nn * (p.theta_niche - p.theta_trend + 2.0 * p.e_bar) /
           (nt * (p.theta_trend - p.e_bar) - nn * (p.theta_niche + p.e_bar));
  }
  return 0.0;
}

double lambda_non_upper(const Params& p) {
  if (!(p.theta_trend < p.theta_niche)) {
    throw UsageError("lambda_non_upper: requires a niche-preferring user (theta_T < theta_N)");
  }
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  if (p.e_bar >= (p.theta_niche - p.theta_trend) / 2.0) return 0.0;
  if (p.e_bar > (nn * p.theta_niche - nt * p.theta_trend) / (nt + nn)) {
    // Largest lambda for which the worst-case draw (eps_T, eps_N) = (+E, -E)
    // still keeps the niche item on top.
    return nt * nn * ((p.theta_niche - p.e_bar) - (p.theta_trend + p.e_bar)) /
           (nt * (p.theta_trend + p.e_bar) - nn * (p.theta_niche - p.e_bar));
  }
  return std::numeric_limits<double>::infinity();
}

double a_ratio(double lambda, const Params& p, const NoiseRealization& e) {
  if (!(lambda >= 0.0)) throw UsageError("a_ratio: lambda must be >= 0");
  const double niche = p.theta_niche + e.niche;
  if (niche == 0.0) throw DegenerateInputError("a_ratio: theta_N + eps_bar_N is zero");
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  return nt * (nn + lambda) * (p.theta_trend + e.trend) / (nn * (nt + lambda) * niche);
}

double b_term(double lambda, const Params& p, const NoiseRealization& e) {
  const double a = a_ratio(lambda, p, e);
  return a * (p.theta_trend / p.theta_niche - a) / std::pow(a * a + 1.0, 1.5);
}

double gradient_prefactor(double lambda, const Params& p, const AttentionWeights& attention) {
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  return attention.sum() * (nt - nn) * p.theta_niche / ((nt + lambda) * (nn + lambda));
}

std::optional<double> lambda_str_upper(const Params& p, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw UsageError("lambda_str_upper: alpha must lie in (0, 0.5)");
  }
  const double nt = p.n_trend;
  const double nn = p.n_niche;
  const double tt = p.theta_trend;
  const double tn = p.theta_niche;
  const double e = p.e_bar;
  const double c = 1.0 + 1.0 / nt;
  const double num = nt * nn *
                     (e * c * tt * std::pow(nn, alpha - 0.5) + e * tn * std::pow(nt, alpha - 0.5) +
                      tn * tt / nt);
  const double den = tt * tn * (nt - nn * c) - e * tn * std::pow(nt, alpha + 0.5) -
                     e * c * tt * std::pow(nn, alpha + 0.5);
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

NoiseRealization sample_noise(const Params& p, Rng& rng) {
  std::uniform_real_distribution<double> dist(-p.e_bar, p.e_bar);
  double st = 0.0;
  for (int i = 0; i < p.n_trend; ++i) st += dist(rng);
  double sn = 0.0;
  for (int i = 0; i < p.n_niche; ++i) sn += dist(rng);
  return {st / p.n_trend, sn / p.n_niche};
}

double nonstrategic_welfare(double lambda, const Params& p, const NoiseRealization& e,
                            const AttentionWeights& attention) {
  const double value = f_gap(lambda, p, e) >= 0.0 ? p.theta_trend : p.theta_niche;
  return attention.sum() * value;
}

double strategic_welfare(double lambda, const Params& p, const NoiseRealization& e,
                         const AttentionWeights& attention) {
  const auto c = estimate_coords(lambda, p, e);
  const double norm = std::hypot(c.trend, c.niche);
  if (!(norm > 0.0)) throw DegenerateInputError("strategic_welfare: zero estimate");
  return attention.sum() * (p.theta_trend * c.trend + p.theta_niche * c.niche) / norm;
}

McEstimate expected_welfare_nonstrategic(double lambda, const Params& p,
                                         const AttentionWeights& attention, long samples,
                                         std::uint64_t seed, Exec exec) {
  return kernels::monte_carlo(
      samples, seed,
      [&](Rng& rng) { return nonstrategic_welfare(lambda, p, sample_noise(p, rng), attention); },
      exec);
}

McEstimate expected_welfare_strategic(double lambda, const Params& p,
                                      const AttentionWeights& attention, long samples,
                                      std::uint64_t seed, Exec exec) {
  return kernels::monte_carlo(
      samples, seed,
      [&](Rng& rng) { return strategic_welfare(lambda, p, sample_noise(p, rng), attention); },
      exec);
}

McEstimate welfare_gradient_strategic(double lambda, const Params& p,
                                      const AttentionWeights& attention, long samples,
                                      std::uint64_t seed, Exec exec) {
  const double pre = gradient_prefactor(lambda, p, attention);
  return kernels::monte_carlo(
      samples, seed, [&](Rng& rng) { return pre * b_term(lambda, p, sample_noise(p, rng)); }, exec);
}

McEstimate trend_probability(double lambda, const Params& p, long samples, std::uint64_t seed,
                             Exec exec) {
  return kernels::monte_carlo(
      samples, seed,
      [&](Rng& rng) { return f_gap(lambda, p, sample_noise(p, rng)) >= 0.0 ? 1.0 : 0.0; }, exec);
}

}  // namespace c3bv::prent
