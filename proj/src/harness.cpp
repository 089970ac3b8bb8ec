#include "c3bv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <sstream>

#include "c3bv/kernels.hpp"
#include "c3bv/rng.hpp"
#include "c3bv/welfare.hpp"

namespace c3bv {

Objective parse_objective(const std::string& name) {
  if (name == "user_welfare") return Objective::user_welfare;
  if (name == "nash_social_welfare" || name == "nsw") return Objective::nash_social_welfare;
  throw UsageError("unknown objective: " + name);
}

std::string to_string(Objective objective) {
  return objective == Objective::user_welfare ? "user_welfare" : "nash_social_welfare";
}

std::string Mode::label() const { return strategic ? mechanism.name() : "nonstrategic"; }

std::vector<double> SweepSpec::synthetic_grid() { return {0.0, 0.1, 1.0, 10.0, 100.0}; }

std::vector<double> SweepSpec::dataset_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

void SweepSpec::validate() const {
  if (lambda_grid.empty()) throw UsageError("sweep: lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] >= 0.0) || !std::isfinite(lambda_grid[i])) {
      throw UsageError("sweep: lambda values must be finite and >= 0");
    }
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) {
      throw UsageError("sweep: lambda grid must be strictly ascending");
    }
  }
  if (replicates < 1) throw UsageError("sweep: replicates must be >= 1");
  if (!include_nonstrategic && mechanisms.empty()) throw UsageError("sweep: nothing to evaluate");
  auto labels = std::vector<std::string>();
  for (const auto& m : modes()) labels.push_back(m.label());
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw UsageError("sweep: duplicate mechanism");
  }
  dynamics.validate();
}

std::vector<Mode> SweepSpec::modes() const {
  std::vector<Mode> out;
  if (include_nonstrategic) out.push_back(Mode::baseline());
  for (const auto& m : mechanisms) out.push_back(Mode::with(m));
  return out;
}

const Optimum& SweepResult::optimum(const std::string& mode) const {
  for (const auto& o : optima) {
    if (o.mode == mode) return o;
  }
  throw UsageError("sweep result has no mode '" + mode + "'");
}

std::uint64_t noise_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, {0x401CEull, static_cast<std::uint64_t>(replicate)});
}

std::uint64_t dynamics_seed(std::uint64_t master, int lambda_index, int mode_index, int replicate) {
  return derive_seed(master, {0xD1Aull, static_cast<std::uint64_t>(lambda_index),
                              static_cast<std::uint64_t>(mode_index),
                              static_cast<std::uint64_t>(replicate)});
}

CellOutcome run_cell(const GameInstance& instance, double lambda, const Mode& mode,
                     std::uint64_t noise, const DynamicsConfig& dynamics,
                     const EstimateOptions& estimate, bool keep_trace) {
  GameInstance game = instance.with_lambda(lambda);
  if (mode.strategic && !(game.mechanism() == mode.mechanism)) {
    game = game.with_mechanism(mode.mechanism);
  }
  const auto ratings = generate_ratings(game, noise);
  const auto est = estimate_users(game, ratings, estimate);

  CellOutcome out;
  out.jittered = est.jittered;
  StrategyProfile profile = StrategyProfile::from_contents(game);
  if (mode.strategic) {
    DynamicsConfig cfg = dynamics;
    if (!keep_trace) cfg.record = DynamicsConfig::Record::final_only;
    auto trace = run_dynamics(game, est, cfg);
    profile = trace.final_profile;
    if (keep_trace) out.trace = std::move(trace);
  }
  const auto utilities = kernels::user_utilities(game.users(), est.u_hat, profile.matrix(),
                                                 game.attention().values(), Exec::serial);
  out.welfare = kernels::ordered_sum(utilities);
  out.nsw = nash_social_welfare(utilities);
  return out;
}

namespace {

struct Moments {
  double mean = 0.0;
  double stderr_value = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  m.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum ss;
    for (double x : xs) ss.add((x - m.mean) * (x - m.mean));
    const double n = static_cast<double>(xs.size());
    m.stderr_value = std::sqrt(ss.value() / (n - 1.0) / n);
  }
  return m;
}

std::string cell_context(double lambda, const std::string& mode, int replicate) {
  std::ostringstream os;
  os.precision(17);
  os << "cell (lambda=" << lambda << ", mode=" << mode << ", replicate=" << replicate << "): ";
  return os.str();
}

}  // namespace

std::vector<Aggregate> aggregate_cells(const std::vector<CellRecord>& cells,
                                       const std::vector<std::string>& modes,
                                       const std::vector<double>& grid) {
  std::vector<Aggregate> out;
  for (const auto& mode : modes) {
    for (std::size_t li = 0; li < grid.size(); ++li) {
      std::vector<double> w;
      std::vector<double> nsw;
      for (const auto& c : cells) {
        if (c.mode == mode && c.lambda_index == static_cast<int>(li)) {
          w.push_back(c.welfare);
          nsw.push_back(c.nsw);
        }
      }
      const auto mw = moments(w);
      const auto mn = moments(nsw);
      out.push_back({mode, static_cast<int>(li), grid[li], static_cast<long>(w.size()), mw.mean,
                     mw.stderr_value, mn.mean, mn.stderr_value});
    }
  }
  return out;
}

std::vector<Optimum> find_optima(const std::vector<Aggregate>& aggregates,
                                 const std::vector<std::string>& modes, Objective objective) {
  std::vector<Optimum> out;
  for (const auto& mode : modes) {
    const Aggregate* best = nullptr;
    for (const auto& a : aggregates) {
      if (a.mode != mode || a.count == 0) continue;
      // Strict improvement only: on ties the smaller lambda stays.
      if (!best || a.mean(objective) > best->mean(objective) ||
          (a.mean(objective) == best->mean(objective) && a.lambda < best->lambda)) {
        best = &a;
      }
    }
    if (!best) throw UsageError("sweep: no cells for mode '" + mode + "'");
    out.push_back({mode, best->lambda, best->mean(objective), best->stderr_of(objective)});
  }
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, const InstanceBuilder& builder) {
  spec.validate();
  const auto modes = spec.modes();
  std::vector<GameInstance> instances;
  for (const auto& m : modes) instances.push_back(builder(m.strategic ? m.mechanism : MechanismId{}));

  const int n_lambda = static_cast<int>(spec.lambda_grid.size());
  const int n_mode = static_cast<int>(modes.size());
  const int reps = spec.replicates;
  const long total = static_cast<long>(n_lambda) * n_mode * reps;

  SweepResult result;
  result.objective = spec.objective;
  result.lambda_grid = spec.lambda_grid;
  for (const auto& m : modes) result.modes.push_back(m.label());
  result.cells.resize(static_cast<std::size_t>(total));

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 1)
  for (long idx = 0; idx < total; ++idx) {
    const int r = static_cast<int>(idx % reps);
    const int mi = static_cast<int>((idx / reps) % n_mode);
    const int li = static_cast<int>(idx / (static_cast<long>(reps) * n_mode));
    const double lambda = spec.lambda_grid[static_cast<std::size_t>(li)];
    const Mode& mode = modes[static_cast<std::size_t>(mi)];
    try {
      DynamicsConfig cfg = spec.dynamics;
      cfg.seed = dynamics_seed(spec.master_seed, li, mi, r);
      const auto o = run_cell(instances[static_cast<std::size_t>(mi)], lambda, mode,
                              noise_seed(spec.master_seed, r), cfg, spec.estimate, false);
      result.cells[static_cast<std::size_t>(idx)] = {li, lambda, mode.label(), r, o.welfare, o.nsw,
                                                     o.jittered};
    } catch (...) {
      errors[static_cast<std::size_t>(idx)] = std::current_exception();
    }
  }
  // Report the first failing cell in table order, independent of scheduling.
  for (long idx = 0; idx < total; ++idx) {
    if (!errors[static_cast<std::size_t>(idx)]) continue;
    const int r = static_cast<int>(idx % reps);
    const int mi = static_cast<int>((idx / reps) % n_mode);
    const int li = static_cast<int>(idx / (static_cast<long>(reps) * n_mode));
    const auto ctx = cell_context(spec.lambda_grid[static_cast<std::size_t>(li)],
                                  modes[static_cast<std::size_t>(mi)].label(), r);
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(idx)]);
    } catch (const RankDeficientError& e) {
      throw RankDeficientError(ctx + e.what(), e.condition());
    } catch (const UsageError& e) {
      throw UsageError(ctx + e.what());
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError(ctx + e.what());
    } catch (const std::exception& e) {
      throw Error(ctx + e.what());
    }
  }
  result.aggregates = aggregate_cells(result.cells, result.modes, result.lambda_grid);
  result.optima = find_optima(result.aggregates, result.modes, spec.objective);
  return result;
}

DynamicsConfig dynamics_from_json(const nlohmann::json& j, DynamicsConfig cfg) {
  cfg.eta = j.value("eta", cfg.eta);
  cfg.horizon = j.value("horizon", cfg.horizon);
  if (j.contains("order")) {
    const auto o = j.at("order").get<std::string>();
    if (o == "round_robin") {
      cfg.order = DynamicsConfig::Order::round_robin;
    } else if (o == "random_permutation") {
      cfg.order = DynamicsConfig::Order::random_permutation;
    } else {
      throw UsageError("unknown update order: " + o);
    }
  }
  if (j.contains("candidate_eval")) {
    const auto c = j.at("candidate_eval").get<std::string>();
    if (c == "unprojected") {
      cfg.candidate_eval = DynamicsConfig::CandidateEval::unprojected;
    } else if (c == "projected") {
      cfg.candidate_eval = DynamicsConfig::CandidateEval::projected;
    } else {
      throw UsageError("unknown candidate_eval: " + c);
    }
  }
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

SweepSpec sweep_spec_from_json(const nlohmann::json& j, const SweepSpec& defaults) {
  SweepSpec s = defaults;
  try {
    if (j.contains("lambda_grid")) s.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    if (j.contains("mechanisms")) {
      s.mechanisms.clear();
      for (const auto& name : j.at("mechanisms")) {
        s.mechanisms.push_back(MechanismId::parse(name.get<std::string>()));
      }
    }
    s.include_nonstrategic = j.value("include_nonstrategic", s.include_nonstrategic);
    s.replicates = j.value("replicates", s.replicates);
    if (j.contains("objective")) s.objective = parse_objective(j.at("objective").get<std::string>());
    if (j.contains("dynamics")) s.dynamics = dynamics_from_json(j.at("dynamics"), s.dynamics);
    s.master_seed = j.value("seed", s.master_seed);
    s.estimate.clamp_nonneg = j.value("clamp_estimates", s.estimate.clamp_nonneg);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sweep config: ") + e.what(), 0);
  }
  return s;
}

}  // namespace c3bv

namespace c3bv {

EnvironmentSpec environment_from_json(const nlohmann::json& j) {
  EnvironmentSpec e;
  try {
    const auto kind = j.value("kind", std::string("trend_market"));
    if (kind == "trend_market") {
      e.kind = EnvironmentSpec::Kind::trend_market;
    } else if (kind == "niche_market") {
      e.kind = EnvironmentSpec::Kind::niche_market;
    } else if (kind == "prent") {
      e.kind = EnvironmentSpec::Kind::prent;
    } else if (kind == "dataset") {
      e.kind = EnvironmentSpec::Kind::dataset;
    } else {
      throw UsageError("unknown environment kind: " + kind);
    }
    e.k = j.value("k", e.k);
    e.seed = j.value("seed", e.seed);
    auto& m = e.market;
    m.m = j.value("m", m.m);
    m.d = j.value("d", m.d);
    m.n_trend = j.value("n_trend", m.n_trend);
    m.n_niche = j.value("n_niche", m.n_niche);
    m.sigma_e = j.value("sigma_e", m.sigma_e);
    auto& p = e.prent;
    p.n_trend = j.value("n_trend", p.n_trend);
    p.n_niche = j.value("n_niche", p.n_niche);
    p.theta_trend = j.value("theta_trend", p.theta_trend);
    p.theta_niche = j.value("theta_niche", p.theta_niche);
    p.e_bar = j.value("e_bar", p.e_bar);
    e.ratings_path = j.value("ratings", e.ratings_path);
    e.ratings_format = j.value("format", e.ratings_format);
    e.factors_dir = j.value("factors", e.factors_dir);
    e.nmf.d = j.value("nmf_d", e.nmf.d);
    e.nmf.max_iter = j.value("nmf_max_iter", e.nmf.max_iter);
    e.nmf.tol = j.value("nmf_tol", e.nmf.tol);
    e.dataset.n_creators = j.value("n_creators", e.dataset.n_creators);
    e.dataset.sigma_e = j.value("sigma_e", e.dataset.sigma_e);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("environment config: ") + ex.what(), 0);
  }
  return e;
}

namespace {

RatingTable load_ratings(const std::string& path, const std::string& format) {
  if (format == "movielens") return parse_movielens(path);
  if (format == "amazon") return parse_amazon_5core(path);
  if (format == "csv") return read_rating_table(path);
  throw UsageError("unknown ratings format: " + format);
}

}  // namespace

InstanceBuilder make_builder(const EnvironmentSpec& env) {
  switch (env.kind) {
    case EnvironmentSpec::Kind::trend_market:
    case EnvironmentSpec::Kind::niche_market: {
      MarketOptions o = env.market;
      o.kind = env.kind == EnvironmentSpec::Kind::trend_market ? MarketKind::trend : MarketKind::niche;
      o.k = env.k;
      o.seed = env.seed;
      return [o](const MechanismId& mech) {
        MarketOptions local = o;
        local.mechanism = mech;
        return build_synthetic_market(local).instance;
      };
    }
    case EnvironmentSpec::Kind::prent: {
      const auto p = prent::Params::make(env.prent.n_trend, env.prent.n_niche, env.prent.theta_trend,
                                         env.prent.theta_niche, env.prent.e_bar);
      const int k = env.k;
      const auto seed = env.seed;
      return [p, k, seed](const MechanismId& mech) {
        return build_prent(p, k, mech, AttentionWeights::log_discount(k), seed);
      };
    }
    case EnvironmentSpec::Kind::dataset: {
      NmfFactors factors;
      if (!env.factors_dir.empty()) {
        factors = load_factors(env.factors_dir);
      } else if (!env.ratings_path.empty()) {
        NmfOptions nmf = env.nmf;
        nmf.seed = derive_seed(env.seed, {0x11F});
        factors = factorize_nmf(load_ratings(env.ratings_path, env.ratings_format), nmf);
      } else {
        throw UsageError("dataset environment needs 'ratings' or 'factors'");
      }
      auto shared = std::make_shared<const NmfFactors>(std::move(factors));
      DatasetOptions o = env.dataset;
      o.k = env.k;
      o.seed = env.seed;
      return [shared, o](const MechanismId& mech) {
        DatasetOptions local = o;
        local.mechanism = mech;
        return build_dataset_instance(*shared, local).instance;
      };
    }
  }
  throw UsageError("unknown environment kind");
}

}  // namespace c3bv
