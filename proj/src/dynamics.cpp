#include "c3bv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "c3bv/kernels.hpp"
#include "c3bv/mechanisms.hpp"

namespace c3bv {

void DynamicsConfig::validate() const {
  if (!(eta > 0.0) || !(eta <= 1.0)) throw UsageError("dynamics: eta must lie in (0, 1]");
  if (horizon < 0) throw UsageError("dynamics: horizon must be >= 0");
}

LbrEngine::LbrEngine(const GameInstance& instance, const Mat& u_hat, StrategyProfile profile,
                     DynamicsConfig cfg)
    : instance_(instance), u_hat_(u_hat), profile_(std::move(profile)), cfg_(cfg) {
  cfg_.validate();
  if (u_hat_.rows() != instance.num_users() || u_hat_.cols() != instance.dim()) {
    throw UsageError("LbrEngine: estimate matrix shape does not match the instance");
  }
  if (profile_.size() != instance.num_contents()) {
    throw UsageError("LbrEngine: profile size does not match the number of creators");
  }
  const auto n = profile_.size();
  const auto m = u_hat_.rows();
  scores_.resize(n, m);
  column_.resize(m);
  if (instance_.mechanism().kind == MechanismId::Kind::softmax_share) {
    exp_scores_.resize(n, m);
    shift_ = u_hat_.rowwise().norm();
  }
  for (int j = 0; j < n; ++j) refresh_creator(j);
}

void LbrEngine::refresh_creator(int j) {
  const Vec& s = profile_.strategies[static_cast<std::size_t>(j)].vec();
  scores_.row(j) = (u_hat_ * s).transpose();
  if (exp_scores_.size() != 0) {
    const double beta = instance_.mechanism().beta;
    for (Eigen::Index i = 0; i < scores_.cols(); ++i) {
      exp_scores_(j, i) = std::exp(beta * (scores_(j, i) - shift_[i]));
    }
  }
}

double LbrEngine::utility_of_column(int j, const double* column) const {
  const auto& mech = instance_.mechanism();
  const auto& attention = instance_.attention();
  const int n = static_cast<int>(scores_.rows());
  const Eigen::Index m = scores_.cols();
  const int cutoff = mech.kind == MechanismId::Kind::winner_value ? 1 : attention.k();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double own = column[i];
    const double* others = scores_.data() + i * n;
    if (mech.kind == MechanismId::Kind::softmax_share) {
      const double* exps = exp_scores_.data() + i * n;
      const double e_own = std::exp(mech.beta * (own - shift_[i]));
      double denom = e_own;
      for (int t = 0; t < n; ++t) {
        if (t != j) denom += exps[t];
      }
      if (denom > 0.0 && std::isfinite(denom)) {
        total += e_own / denom;
      } else {
        std::vector<double> row(others, others + n);
        row[static_cast<std::size_t>(j)] = own;
        total += per_user_reward(j, row, mech, attention);
      }
      continue;
    }
    int rank = 0;
    for (int t = 0; t < n && rank < cutoff; ++t) {
      if (t == j) continue;
      const double s = others[t];
      if (s > own || (s == own && t < j)) ++rank;
    }
    if (rank >= cutoff) continue;
    switch (mech.kind) {
      case MechanismId::Kind::exposure_topk: total += attention[rank]; break;
      case MechanismId::Kind::engagement_topk: total += attention[rank] * std::max(own, 0.0); break;
      case MechanismId::Kind::winner_value: total += std::max(own, 0.0); break;
      case MechanismId::Kind::softmax_share: break;
    }
  }
  return total;
}

double LbrEngine::utility(int j) const {
  for (Eigen::Index i = 0; i < scores_.cols(); ++i) column_[i] = scores_(j, i);
  return utility_of_column(j, column_.data());
}

double LbrEngine::utility_if(int j, const Vec& strategy) const {
  column_.noalias() = u_hat_ * strategy;
  return utility_of_column(j, column_.data());
}

bool LbrEngine::step(int j, Rng& rng) {
  if (j < 0 || j >= profile_.size()) throw UsageError("lbr: creator index out of range");
  const auto& current = profile_.strategies[static_cast<std::size_t>(j)];
  const Vec g = random_unit_direction(u_hat_.cols(), rng);
  const Vec candidate = current.vec() + cfg_.eta * g;
  const double before = utility(j);
  double after = 0.0;
  std::optional<UnitNonnegVec> landed;
  if (cfg_.candidate_eval == DynamicsConfig::CandidateEval::projected) {
    landed = project_nonneg_sphere(candidate, current);
    after = utility_if(j, landed->vec());
  } else {
    after = utility_if(j, candidate);
  }
  if (!(after >= before)) return false;
  if (!landed) landed = project_nonneg_sphere(candidate, current);
  profile_.strategies[static_cast<std::size_t>(j)] = *landed;
  refresh_creator(j);
  return true;
}

double LbrEngine::welfare() const {
  return kernels::ordered_sum(kernels::user_utilities(instance_.users(), u_hat_, profile_.matrix(),
                                                      instance_.attention().values(), Exec::serial));
}

StrategyProfile lbr_step(const StrategyProfile& profile, int j, const GameInstance& instance,
                         const EstimatedUsers& estimates, const DynamicsConfig& cfg, Rng& rng) {
  LbrEngine engine(instance, estimates.u_hat, profile, cfg);
  engine.step(j, rng);
  return engine.profile();
}

DynamicsTrace run_dynamics(const GameInstance& instance, const EstimatedUsers& estimates,
                           const DynamicsConfig& cfg) {
  return run_dynamics(instance, estimates, StrategyProfile::from_contents(instance), cfg);
}

DynamicsTrace run_dynamics(const GameInstance& instance, const EstimatedUsers& estimates,
                           StrategyProfile initial, const DynamicsConfig& cfg) {
  cfg.validate();
  LbrEngine engine(instance, estimates.u_hat, std::move(initial), cfg);
  Rng rng(cfg.seed);
  const int n = static_cast<int>(instance.num_contents());
  DynamicsTrace trace;

  auto record = [&] {
    const double w = engine.welfare();
    trace.welfare.push_back(w);
    for (int j = 0; j < n; ++j) {
      trace.rows.push_back({engine.profile().step, j, engine.utility(j), w});
    }
  };

  if (cfg.record == DynamicsConfig::Record::full) record();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (long round = 0; round < cfg.horizon; ++round) {
    if (cfg.order == DynamicsConfig::Order::random_permutation) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    for (int j : order) {
      ++trace.proposals;
      if (engine.step(j, rng)) ++trace.accepted_moves;
    }
    ++engine.mutable_profile().step;
    if (cfg.record == DynamicsConfig::Record::full) record();
  }
  if (cfg.record == DynamicsConfig::Record::final_only) record();
  trace.final_profile = engine.profile();
  return trace;
}

DeviationProbe probe_deviations(const GameInstance& instance, const Mat& u_hat,
                                const StrategyProfile& profile, int j, long samples,
                                const DynamicsConfig& cfg, Rng& rng) {
  LbrEngine engine(instance, u_hat, profile, cfg);
  const auto& current = profile.strategies.at(static_cast<std::size_t>(j));
  const double base = engine.utility(j);
  DeviationProbe probe;
  for (long s = 0; s < samples; ++s) {
    const Vec candidate = current.vec() + cfg.eta * random_unit_direction(u_hat.cols(), rng);
    double value = 0.0;
    if (cfg.candidate_eval == DynamicsConfig::CandidateEval::projected) {
      value = engine.utility_if(j, project_nonneg_sphere(candidate, current).vec());
    } else {
      value = engine.utility_if(j, candidate);
    }
    ++probe.samples;
    if (value > base) {
      ++probe.strictly_improving;
      probe.best_gain = std::max(probe.best_gain, value - base);
    }
  }
  return probe;
}

}  // namespace c3bv
