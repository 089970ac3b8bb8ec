#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "c3bv/datasets.hpp"
#include "c3bv/export.hpp"
#include "c3bv/harness.hpp"
#include "c3bv/nmf.hpp"
#include "c3bv/prent.hpp"

using namespace c3bv;

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad lambda grid entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty lambda grid");
  return out;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

RatingTable load_table(const std::string& path, const std::string& format) {
  if (format == "movielens") return parse_movielens(path);
  if (format == "amazon") return parse_amazon_5core(path);
  if (format == "csv") return read_rating_table(path);
  throw UsageError("unknown format '" + format + "' (movielens, amazon, csv)");
}

struct EnvFlags {
  std::string config;
  std::string env;
  std::string ratings;
  std::string format;
  std::string factors;
  std::optional<int> k;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config (environment + sweep fields)");
    app->add_option("--env", env, "trend_market, niche_market, prent or dataset");
    app->add_option("--ratings", ratings, "ratings file for the dataset environment");
    app->add_option("--format", format, "ratings format: movielens, amazon, csv");
    app->add_option("--factors", factors, "directory with saved NMF factors");
    app->add_option("--k", k, "top-K slots");
    app->add_option("--seed", seed, "master seed");
  }

  nlohmann::json config_json() const {
    return config.empty() ? nlohmann::json::object() : read_json(config);
  }

  EnvironmentSpec environment(const nlohmann::json& cfg) const {
    nlohmann::json e = cfg.value("environment", nlohmann::json::object());
    if (!env.empty()) e["kind"] = env;
    if (!ratings.empty()) e["ratings"] = ratings;
    if (!format.empty()) e["format"] = format;
    if (!factors.empty()) e["factors"] = factors;
    if (k) e["k"] = *k;
    if (seed) e["seed"] = *seed;
    else if (cfg.contains("seed") && !e.contains("seed")) e["seed"] = cfg["seed"];
    return environment_from_json(e);
  }
};

int cmd_theory(int n_t, int n_n, double th_t, double th_n, double e_bar, const std::string& grid,
               long samples, std::uint64_t seed, int k, double alpha, const std::string& out_path) {
  const auto p = prent::Params::make(n_t, n_n, th_t, th_n, e_bar);
  const auto attention = AttentionWeights::log_discount(k);
  const double nan = std::nan("");
  const double lower = th_t > th_n ? prent::lambda_non_lower(p) : nan;
  const double upper = th_t < th_n ? prent::lambda_non_upper(p) : nan;
  const auto str_upper = prent::lambda_str_upper(p, alpha);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "lambda,f_zero_noise,p_trend,p_trend_stderr,welfare_nonstrategic,welfare_nonstrategic_stderr,"
         "welfare_strategic,welfare_strategic_stderr,gradient_strategic,gradient_strategic_stderr,"
         "lambda_non_lower,lambda_non_upper,lambda_str_upper\n";
  for (double lambda : parse_grid(grid)) {
    const auto pt = prent::trend_probability(lambda, p, samples, seed);
    const auto wn = prent::expected_welfare_nonstrategic(lambda, p, attention, samples, seed);
    const auto ws = prent::expected_welfare_strategic(lambda, p, attention, samples, seed);
    const auto g = prent::welfare_gradient_strategic(lambda, p, attention, samples, seed);
    out << fmt(lambda) << ',' << fmt(prent::f_gap(lambda, p, {})) << ',' << fmt(pt.mean) << ','
        << fmt(pt.std_error) << ',' << fmt(wn.mean) << ',' << fmt(wn.std_error) << ','
        << fmt(ws.mean) << ',' << fmt(ws.std_error) << ',' << fmt(g.mean) << ','
        << fmt(g.std_error) << ',' << fmt(lower) << ',' << fmt(upper) << ','
        << fmt(str_upper ? *str_upper : nan) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularization sweeps for strategic content-creator games"};
  app.require_subcommand(1);

  // theory
  auto* theory = app.add_subcommand("theory", "Two-group closed forms and Monte Carlo welfare (CSV)");
  int n_t = 9, n_n = 1, k_theory = 1;
  double th_t = 0.8, th_n = 0.6, e_bar = 0.1, alpha = 0.25;
  std::string theory_grid = "0,0.1,0.2,0.5,1,2,5,10";
  long samples = 100000;
  std::uint64_t theory_seed = 0;
  std::string theory_out;
  theory->add_option("--n-trend", n_t, "trend group size")->capture_default_str();
  theory->add_option("--n-niche", n_n, "niche group size")->capture_default_str();
  theory->add_option("--theta-trend", th_t)->capture_default_str();
  theory->add_option("--theta-niche", th_n)->capture_default_str();
  theory->add_option("--e-bar", e_bar, "uniform noise half-width")->capture_default_str();
  theory->add_option("--alpha", alpha, "exponent for the strategic upper bound")->capture_default_str();
  theory->add_option("--lambda-grid", theory_grid)->capture_default_str();
  theory->add_option("--samples", samples)->capture_default_str();
  theory->add_option("--seed", theory_seed)->capture_default_str();
  theory->add_option("--k", k_theory)->capture_default_str();
  theory->add_option("--out", theory_out, "CSV path (stdout if omitted)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "One cell with a dynamics trace");
  EnvFlags sim_env;
  sim_env.attach(simulate);
  double sim_lambda = 0.0;
  std::string sim_mode = "exposure_topk";
  std::optional<long> sim_horizon;
  std::optional<double> sim_eta;
  int sim_replicate = 0;
  std::string sim_trace;
  simulate->add_option("--lambda", sim_lambda)->capture_default_str();
  simulate->add_option("--mechanism", sim_mode, "mechanism name or 'nonstrategic'")->capture_default_str();
  simulate->add_option("--horizon", sim_horizon);
  simulate->add_option("--eta", sim_eta);
  simulate->add_option("--replicate", sim_replicate)->capture_default_str();
  simulate->add_option("--trace", sim_trace, "trace CSV path");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Full lambda sweep");
  EnvFlags sweep_env;
  sweep_env.attach(sweep);
  std::string sweep_grid, sweep_objective, sweep_out = "sweep_out";
  std::vector<std::string> sweep_mechs;
  std::optional<int> sweep_reps;
  sweep->add_option("--lambda-grid", sweep_grid, "comma-separated lambdas");
  sweep->add_option("--mechanism", sweep_mechs, "mechanism(s); replaces the config list");
  sweep->add_option("--replicates", sweep_reps);
  sweep->add_option("--objective", sweep_objective, "user_welfare or nash_social_welfare");
  sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Dataset file to a portable rating table");
  std::string ingest_in, ingest_format = "movielens", ingest_out;
  ingest->add_option("--input", ingest_in)->required();
  ingest->add_option("--format", ingest_format)->capture_default_str();
  ingest->add_option("--out", ingest_out, "CSV path");

  // nmf
  auto* nmf = app.add_subcommand("nmf", "Factorize a rating table");
  std::string nmf_in, nmf_format = "csv", nmf_out = "factors";
  NmfOptions nmf_opts;
  nmf->add_option("--input", nmf_in)->required();
  nmf->add_option("--format", nmf_format)->capture_default_str();
  nmf->add_option("--d", nmf_opts.d)->capture_default_str();
  nmf->add_option("--max-iter", nmf_opts.max_iter)->capture_default_str();
  nmf->add_option("--tol", nmf_opts.tol)->capture_default_str();
  nmf->add_option("--seed", nmf_opts.seed)->capture_default_str();
  nmf->add_option("--out", nmf_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*theory) {
      return cmd_theory(n_t, n_n, th_t, th_n, e_bar, theory_grid, samples, theory_seed, k_theory,
                        alpha, theory_out);
    }
    if (*simulate) {
      const auto cfg = sim_env.config_json();
      const auto env = sim_env.environment(cfg);
      SweepSpec spec = sweep_spec_from_json(cfg);
      if (sim_env.seed) spec.master_seed = *sim_env.seed;
      if (sim_horizon) spec.dynamics.horizon = *sim_horizon;
      if (sim_eta) spec.dynamics.eta = *sim_eta;
      spec.dynamics.validate();
      const Mode mode = sim_mode == "nonstrategic" ? Mode::baseline()
                                                   : Mode::with(MechanismId::parse(sim_mode));
      const auto builder = make_builder(env);
      DynamicsConfig dyn = spec.dynamics;
      dyn.seed = dynamics_seed(spec.master_seed, 0, mode.strategic ? 1 : 0, sim_replicate);
      const auto out = run_cell(builder(mode.mechanism), sim_lambda, mode,
                                noise_seed(spec.master_seed, sim_replicate), dyn, spec.estimate, true);
      std::cout << "mode," << mode.label() << "\nlambda," << fmt(sim_lambda) << "\nwelfare,"
                << fmt(out.welfare) << "\nnsw," << fmt(out.nsw) << "\njittered,"
                << (out.jittered ? 1 : 0) << '\n';
      if (out.trace) {
        std::cout << "accepted_moves," << out.trace->accepted_moves << "\nproposals,"
                  << out.trace->proposals << '\n';
        if (!sim_trace.empty()) write_trace_csv(*out.trace, sim_trace);
      }
      return 0;
    }
    if (*sweep) {
      const auto cfg = sweep_env.config_json();
      const auto env = sweep_env.environment(cfg);
      SweepSpec defaults;
      if (env.kind == EnvironmentSpec::Kind::dataset) defaults.lambda_grid = SweepSpec::dataset_grid();
      defaults.mechanisms = {MechanismId::parse("exposure_topk")};
      SweepSpec spec = sweep_spec_from_json(cfg, defaults);
      if (!sweep_grid.empty()) spec.lambda_grid = parse_grid(sweep_grid);
      if (!sweep_mechs.empty()) {
        spec.mechanisms.clear();
        for (const auto& m : sweep_mechs) spec.mechanisms.push_back(MechanismId::parse(m));
      }
      if (sweep_reps) spec.replicates = *sweep_reps;
      if (!sweep_objective.empty()) spec.objective = parse_objective(sweep_objective);
      if (sweep_env.seed) spec.master_seed = *sweep_env.seed;
      const auto result = run_sweep(spec, make_builder(env));
      export_results(result, sweep_out);
      std::cout << "mode,lambda_star,mean,stderr\n";
      for (const auto& o : result.optima) {
        std::cout << o.mode << ',' << fmt(o.lambda_star) << ',' << fmt(o.mean) << ','
                  << fmt(o.stderr_value) << '\n';
      }
      return 0;
    }
    if (*ingest) {
      const auto table = load_table(ingest_in, ingest_format);
      std::cout << "users," << table.num_users() << "\nitems," << table.num_items() << "\nratings,"
                << table.size() << '\n';
      if (!ingest_out.empty()) write_rating_table(table, ingest_out);
      return 0;
    }
    if (*nmf) {
      const auto table = load_table(nmf_in, nmf_format);
      const auto f = factorize_nmf(table, nmf_opts);
      save_factors(f, nmf_out);
      std::cout << "iterations," << f.iterations << "\nconverged," << (f.converged ? 1 : 0)
                << "\nrelative_error," << fmt(f.relative_error) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
