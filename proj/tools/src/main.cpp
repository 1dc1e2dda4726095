// nsbfm command-line tool: simulate, fit, rank, infer, mc, jumps, price.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config_file.hpp"
#include "nsbfm/csv.hpp"
#include "nsbfm/dgp.hpp"
#include "nsbfm/empirics.hpp"
#include "nsbfm/error.hpp"
#include "nsbfm/inference.hpp"
#include "nsbfm/mle.hpp"
#include "nsbfm/montecarlo.hpp"
#include "nsbfm/parallel.hpp"
#include "nsbfm/rankselect.hpp"

#ifndef NSBFM_VERSION
#define NSBFM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace nsbfm;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  int threads = 0;
  std::string out;

  std::string y;
  std::string x;
  std::string fit_dir;
  std::string link = "logit";

  int factors = 1;
  double tol = 1e-8;
  int max_iter = 500;
  int inner_steps = 50;
  int restarts = 1;
  double ridge = 1e-8;
  std::uint64_t seed = 0;

  int kmax = 4;       // mc
  int rank_kmax = 8;  // rank
  std::string regime = "nonstat";
  double level = 0.95;

  int dgp_case = 1;
  long n = 100;
  long t = 100;
  int m = 1;
  std::uint32_t replication = 0;
  bool no_rank = false;

  std::string input;
  std::string jump_factors;
  std::string ff5;
  std::string returns;
  long window = 0;
  int lags = -1;
};

struct Cli {
  CLI::App app{"Binary-outcome factor models with integrated covariates and factors", "nsbfm"};
  Options o;
  std::map<std::string, CLI::App*> subs;

  Cli() {
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", std::string(NSBFM_VERSION));

    auto* simulate = add("simulate", "Draw a panel from the simulation design");
    add_design(simulate);
    simulate->add_option("--replication", o.replication, "Replication index (independent stream)");

    auto* fit = add("fit", "Estimate B, Lambda and F by alternating maximum likelihood");
    add_data(fit);
    add_estimation(fit);
    fit->add_option("--factors", o.factors, "Number of factors")->check(CLI::NonNegativeNumber);

    auto* rank = add("rank", "Select the number of factors from an overfitted fit");
    add_data(rank);
    add_estimation(rank);
    rank->add_option("--kmax", o.rank_kmax, "Factors in the overfitted fit")->check(CLI::PositiveNumber);
    rank->add_option("--regime", o.regime, "Threshold rule")
        ->check(CLI::IsMember({"nonstat", "nonstationary", "coint", "cointegrated"}));

    auto* infer = add("infer", "Plug-in covariances, intervals, local times and MSE for a fit");
    add_data(infer);
    infer->add_option("--link", o.link, "Link function")->check(CLI::IsMember({"logit", "probit"}));
    infer->add_option("--fit", o.fit_dir, "Directory written by `fit`")->required();
    infer->add_option("--level", o.level, "Interval coverage")->check(CLI::Range(0.0, 1.0));

    auto* mc = add("mc", "Monte Carlo replications of the simulation design");
    add_design(mc);
    add_estimation(mc);
    mc->add_option("--M", o.m, "Replications")->check(CLI::PositiveNumber);
    mc->add_option("--kmax", o.kmax, "Factors in the rank-selection fit")->check(CLI::PositiveNumber);
    mc->add_flag("--no-rank", o.no_rank, "Skip rank selection");

    auto* jumps = add("jumps", "MinRV jump indicators from per-asset intraday return files");
    jumps->add_option("--input", o.input, "Directory of per-asset CSVs (date,r_1,...,r_M)")->required();
    jumps->add_option("--level", o.level, "Jump test level")->check(CLI::Range(0.5, 1.0));

    auto* price = add("price", "Six-factor pricing regressions, GRS, canonical correlations");
    price->add_option("--jump-factors", o.jump_factors, "T x r factor matrix, e.g. F.csv from `fit`")->required();
    price->add_option("--ff5", o.ff5, "CSV with header date,MKT,SMB,HML,RMW,CMA,RF")->required();
    price->add_option("--returns", o.returns, "N x T excess returns, no header")->required();
    price->add_option("--window", o.window, "Rolling window for explained variation (0 = skip)")
        ->check(CLI::NonNegativeNumber);
    price->add_option("--lags", o.lags, "ADF lags (-1 = floor(12 (T/100)^{1/4}))");
  }

  CLI::App* add(const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", o.config, "key=value file; flags take precedence");
    s->add_option("--threads", o.threads, "Worker threads (0 = NSBFM_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--out", o.out, "Output directory")->required();
    subs[name] = s;
    return s;
  }

  void add_data(CLI::App* s) {
    s->add_option("--y,--outcomes", o.y, "N x T 0/1 outcome CSV")->required();
    s->add_option("--x,--covariates", o.x, "Long-format covariate CSV (unit,period,cov_1..)");
  }

  void add_estimation(CLI::App* s) {
    if (!s->get_option_no_throw("--link"))
      s->add_option("--link", o.link, "Link function")->check(CLI::IsMember({"logit", "probit"}));
    s->add_option("--tol", o.tol, "Outer tolerance, relative to N T")->check(CLI::PositiveNumber);
    s->add_option("--max-iter", o.max_iter, "Outer iteration cap")->check(CLI::PositiveNumber);
    s->add_option("--inner-steps", o.inner_steps, "Newton steps per block")->check(CLI::PositiveNumber);
    s->add_option("--restarts", o.restarts, "Number of starts")->check(CLI::PositiveNumber);
    s->add_option("--ridge", o.ridge, "Initial ridge, relative to the block trace")->check(CLI::PositiveNumber);
    if (!s->get_option_no_throw("--seed")) s->add_option("--seed", o.seed, "Seed for restarts and simulation");
  }

  void add_design(CLI::App* s) {
    s->add_option("--case", o.dgp_case, "1 = nonstationary, 2 = cointegrated")->check(CLI::IsMember({1, 2}));
    s->add_option("--N", o.n, "Units")->check(CLI::PositiveNumber);
    s->add_option("--T", o.t, "Periods")->check(CLI::Range(2L, 100000000L));
    s->add_option("--link", o.link, "Link function")->check(CLI::IsMember({"logit", "probit"}));
    s->add_option("--seed", o.seed, "RNG seed");
  }

  CLI::App* selected() const { return app.get_subcommands().front(); }
};

// ---- helpers ------------------------------------------------------------------

EstimationConfig estimation(const Options& o) {
  EstimationConfig c;
  c.n_factors = o.factors;
  c.tolerance = o.tol;
  c.max_outer_iterations = o.max_iter;
  c.max_inner_newton_steps = o.inner_steps;
  c.n_restarts = o.restarts;
  c.ridge_floor = o.ridge;
  c.seed = o.seed;
  return c;
}

DgpSpec design(const Options& o) {
  DgpSpec s;
  s.dgp_case = o.dgp_case == 2 ? DgpCase::Cointegrated : DgpCase::Nonstationary;
  s.n_units = o.n;
  s.n_periods = o.t;
  s.link = parse_link(o.link);
  s.seed = o.seed;
  s.replication = o.replication;
  return s;
}

Panel read_panel(const Options& o) {
  if (o.x.empty()) return load_panel(o.y);
  return load_panel(o.y, fs::path(o.x));
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory", dir);
}

std::string fmt(double v) { return csv::format_double(v); }

void write_index_list(const fs::path& path, const std::string& column, const std::vector<Index>& idx) {
  std::vector<std::vector<std::string>> rows;
  for (const Index i : idx) rows.push_back({std::to_string(i)});
  csv::write_table(path, {column}, rows);
}

// ---- subcommands -----------------------------------------------------------------

void run_simulate(const Options& o) {
  const SimulatedPanel sim = simulate(design(o));
  const fs::path out(o.out);
  make_dir(out / "truth");
  csv::write_matrix(out / "y.csv", sim.panel.y());
  save_covariates(sim.panel, out / "covariates.csv");
  csv::write_matrix(out / "truth" / "B.csv", sim.truth.b);
  csv::write_matrix(out / "truth" / "Lambda.csv", sim.truth.lambda);
  csv::write_matrix(out / "truth" / "F.csv", sim.truth.f);
  csv::write_matrix(out / "truth" / "z_true.csv", sim.z_true);
  std::cout << "simulated " << sim.panel.n_units() << " x " << sim.panel.n_periods() << " panel, mean outcome "
            << sim.panel.y().mean() << "\n";
}

void write_diagnostics(const FitResult& f, const fs::path& out) {
  std::vector<std::vector<std::string>> rows;
  const auto add = [&](const char* kind, const std::vector<Index>& idx) {
    for (const Index i : idx) rows.push_back({kind, std::to_string(i)});
  };
  add("degenerate_unit", f.diagnostics.degenerate_units);
  add("degenerate_period", f.diagnostics.degenerate_periods);
  add("non_interior_unit", f.diagnostics.non_interior_units);
  add("non_interior_period", f.diagnostics.non_interior_periods);
  csv::write_table(out / "diagnostics.csv", {"kind", "index"}, rows);
  csv::write_table(out / "summary.csv",
                   {"loglik", "iterations", "converged", "restarts", "best_restart", "factors"},
                   {{fmt(f.final_loglik()), std::to_string(f.n_iterations), f.converged ? "1" : "0",
                     std::to_string(f.diagnostics.restarts), std::to_string(f.diagnostics.best_restart),
                     std::to_string(f.params.n_factors())}});
}

void run_fit(const Options& o) {
  const Panel panel = read_panel(o);
  const FitResult f = fit(panel, parse_link(o.link), estimation(o));
  save_fit(f, o.out);
  write_diagnostics(f, o.out);
  std::cout << "log-likelihood " << f.final_loglik() << " after " << f.n_iterations << " iterations"
            << (f.converged ? "" : " (iteration cap reached)") << "\n";
  if (!f.diagnostics.non_interior_units.empty())
    std::cout << f.diagnostics.non_interior_units.size() << " unit(s) at the index bound, see diagnostics.csv\n";
}

void run_rank(const Options& o) {
  const Panel panel = read_panel(o);
  const RankReport r = select_rank(panel, parse_link(o.link), o.rank_kmax, parse_regime(o.regime), estimation(o));
  const fs::path out(o.out);
  make_dir(out);
  csv::write_table(out / "rank_report.csv", {"k_fit", "regime", "c_nt", "sigma_1", "threshold", "r_hat"},
                   {{std::to_string(r.k_fit), std::string(to_string(r.regime)), fmt(r.c_nt),
                     r.sigma.size() > 0 ? fmt(r.sigma(0)) : "nan", fmt(r.threshold), std::to_string(r.r_hat)}});
  std::vector<std::vector<std::string>> rows;
  std::cout << "  k   sigma_k        above\n";
  for (Index k = 0; k < r.sigma.size(); ++k) {
    const bool above = r.sigma(k) > r.threshold;
    rows.push_back({std::to_string(k + 1), fmt(r.sigma(k)), above ? "1" : "0"});
    char buf[96];
    std::snprintf(buf, sizeof buf, "%3ld   %-12.6g   %s\n", static_cast<long>(k + 1), r.sigma(k), above ? "yes" : "no");
    std::cout << buf;
  }
  csv::write_table(out / "sigma.csv", {"k", "sigma", "above_threshold"}, rows);
  std::cout << "threshold " << r.threshold << " (" << to_string(r.regime) << "), r_hat = " << r.r_hat << "\n";
}

void run_infer(const Options& o) {
  const Panel panel = read_panel(o);
  const LinkKind kind = parse_link(o.link);
  const FitResult f = load_fit(o.fit_dir);
  ModelParams(f.params).check_against(panel);
  if (!(o.level > 0.0 && o.level < 1.0)) throw UsageError("--level must lie strictly between 0 and 1");
  const InferenceReport rep = covariances(panel, f, kind);
  const fs::path out(o.out);
  make_dir(out);

  const auto long_cov = [](const std::vector<Eigen::MatrixXd>& covs, const char* idx_name) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < covs.size(); ++k)
      for (Index a = 0; a < covs[k].rows(); ++a)
        for (Index b = 0; b < covs[k].cols(); ++b)
          rows.push_back({std::to_string(k), std::to_string(a), std::to_string(b), fmt(covs[k](a, b))});
    return std::make_pair(std::vector<std::string>{idx_name, "row", "col", "value"}, rows);
  };
  const auto [ha, ra] = long_cov(rep.cov_alpha, "unit");
  csv::write_table(out / "cov_alpha.csv", ha, ra);
  const auto [hf, rf] = long_cov(rep.cov_f, "period");
  csv::write_table(out / "cov_f.csv", hf, rf);

  std::vector<std::vector<std::string>> lt;
  for (Index i = 0; i < rep.local_time.size(); ++i) lt.push_back({std::to_string(i), fmt(rep.local_time(i))});
  csv::write_table(out / "local_time.csv", {"unit", "local_time"}, lt);
  csv::write_table(out / "mse.csv", {"mse_n_sqrt_t", "mse_nt"}, {{fmt(rep.mse), fmt(rep.mse_nt)}});
  write_index_list(out / "degenerate_units.csv", "unit", rep.degenerate_units);
  write_index_list(out / "degenerate_periods.csv", "period", rep.degenerate_periods);

  std::vector<std::vector<std::string>> cells;
  cells.reserve(static_cast<std::size_t>(panel.n_units() * panel.n_periods()));
  for (Index i = 0; i < panel.n_units(); ++i)
    for (Index t = 0; t < panel.n_periods(); ++t) {
      const ProbInterval p = prob_interval(panel, f, rep, i, t, o.level, kind);
      const ValueInterval c = common_component_interval(panel, f, rep, i, t, o.level);
      cells.push_back({std::to_string(i), std::to_string(t), fmt(p.estimate), fmt(p.lower), fmt(p.upper),
                       p.degenerate ? "1" : "0", fmt(c.estimate), fmt(c.sd), fmt(c.lower), fmt(c.upper)});
    }
  csv::write_table(out / "intervals.csv",
                   {"unit", "period", "prob", "prob_lower", "prob_upper", "degenerate", "common", "common_sd",
                    "common_lower", "common_upper"},
                   cells);
  std::cout << "MSE (N sqrt T) " << rep.mse << ", MSE (NT) " << rep.mse_nt << ", degenerate units "
            << rep.degenerate_units.size() << ", degenerate periods " << rep.degenerate_periods.size() << "\n";
}

void run_mc(const Options& o) {
  McConfig cfg;
  cfg.spec = design(o);
  cfg.n_replications = o.m;
  cfg.estimation = estimation(o);
  cfg.k_max = o.kmax;
  cfg.select_rank = !o.no_rank;
  const McReport rep = nsbfm::run_mc(cfg);
  const fs::path out(o.out);
  make_dir(out);
  write_mc_csv(rep, out / "mc_report.csv");
  csv::write_table(out / "mc_summary.csv",
                   {"mean_rhat", "share_rhat_true", "mae1", "mae2", "mae3", "mae4", "mae4_euclid", "failed",
                    "unconverged"},
                   {{fmt(rep.mean_rhat), fmt(rep.share_rhat_true), fmt(rep.mae1), fmt(rep.mae2), fmt(rep.mae3),
                     fmt(rep.mae4), fmt(rep.mae4_euclid), std::to_string(rep.n_failed),
                     std::to_string(rep.n_unconverged)}});
  std::ostringstream table;
  print_mc_table(cfg, rep, table);
  std::ofstream(out / "mc_table.txt") << table.str();
  std::cout << table.str();
  if (rep.n_failed == cfg.n_replications) throw NumericalError("every replication failed");
}

void run_jumps(const Options& o) {
  if (!(o.level > 0.5 && o.level < 1.0)) throw UsageError("--level must lie strictly between 0.5 and 1");
  const JumpPanel jp = load_jump_panel(o.input, o.level);
  save_jump_panel(jp, o.out);
  std::cout << jp.assets.size() << " assets, " << jp.dates.size() << " days, jump share "
            << jp.indicators.mean() << "\n";
}

Eigen::MatrixXd read_ff5(const fs::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": empty file", 1, 1);
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto fields = csv::split_fields(lines[r]);
    if (fields.size() < 6)
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " needs date and five factors", r + 1,
                       fields.size() + 1);
    std::vector<double> v;
    for (std::size_t c = 1; c <= 5; ++c) v.push_back(csv::parse_double(fields[c], r + 1, c + 1));
    rows.push_back(std::move(v));
  }
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), 5);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Index c = 0; c < 5; ++c) m(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  return m;
}

void run_price(const Options& o) {
  const Eigen::MatrixXd jump = csv::read_matrix(o.jump_factors);
  const Eigen::MatrixXd ff5 = read_ff5(o.ff5);
  const Eigen::MatrixXd returns = csv::read_matrix(o.returns);
  const PricingReport rep = price(returns, ff5, jump);
  const fs::path out(o.out);
  save_pricing_report(rep, out);

  const Index t = jump.rows();
  const int lags = o.lags >= 0 ? o.lags : default_adf_lags(t - 1);
  std::vector<std::vector<std::string>> adf;
  for (Index j = 0; j < jump.cols(); ++j) {
    const Eigen::VectorXd level = jump.col(j);
    const Eigen::VectorXd diff = level.tail(t - 1) - level.head(t - 1);
    adf.push_back({std::to_string(j + 1), std::to_string(lags),
                   fmt(adf_pvalue(std::span<const double>(level.data(), static_cast<std::size_t>(level.size())), lags)),
                   fmt(adf_pvalue(std::span<const double>(diff.data(), static_cast<std::size_t>(diff.size())), lags))});
  }
  csv::write_table(out / "adf.csv", {"factor", "lags", "p_level", "p_difference"}, adf);

  if (o.window > 0) {
    Eigen::MatrixXd augmented(t, ff5.cols() + jump.cols());
    augmented << ff5, jump;
    const Eigen::VectorXd base = explained_variation(returns, ff5, o.window);
    const Eigen::VectorXd aug = explained_variation(returns, augmented, o.window);
    std::vector<std::vector<std::string>> rows;
    for (Index s = 0; s < base.size(); ++s) rows.push_back({std::to_string(s), fmt(base(s)), fmt(aug(s))});
    csv::write_table(out / "explained_variation.csv", {"window_start", "base", "augmented"}, rows);
  }
  std::cout << "mean R2 base " << rep.r2_base.mean() << ", augmented " << rep.r2_augmented.mean() << "\n";
  const auto grs_line = [](const char* name, const GrsResult& g) {
    std::cout << "GRS " << name << ": ";
    if (g.computed)
      std::cout << g.statistic << " (p = " << g.p_value << ")\n";
    else
      std::cout << "skipped, " << g.note << "\n";
  };
  grs_line("base", rep.grs_base);
  grs_line("augmented", rep.grs_augmented);
}

// ---- plumbing ------------------------------------------------------------------

std::string option_key(const CLI::Option* opt) {
  const auto& names = opt->get_lnames();
  return names.empty() ? opt->get_name() : names.front();
}

// Resolved value of every option of the subcommand, flags and config included.
std::map<std::string, std::string> resolved_options(const CLI::App* sub) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string key = option_key(opt);
    if (key == "help" || key == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t k = 0; k < res.size(); ++k) value += (k ? " " : "") + res[k];
      if (opt->get_type_size() == 0 && value.empty()) value = "true";
    } else {
      value = opt->get_default_str();
    }
    out[key] = value;
  }
  return out;
}

void write_manifest(const fs::path& out, const std::string& sub, const std::map<std::string, std::string>& options,
                    double seconds, int exit_code, const std::string& error) {
  nlohmann::ordered_json j;
  j["tool"] = "nsbfm";
  j["version"] = NSBFM_VERSION;
  j["subcommand"] = sub;
  j["options"] = options;
  j["threads"] = num_threads();
  j["wall_time_seconds"] = seconds;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  std::ofstream(out / "manifest.json") << j.dump(2) << "\n";
  std::ofstream cfg(out / "resolved_config.txt");
  cfg << "# " << sub << "\n";
  for (const auto& [k, v] : options)
    if (k != "out" && !v.empty()) cfg << k << "=" << v << "\n";
}

int dispatch(const std::string& name, const Options& o) {
  if (name == "simulate") run_simulate(o);
  else if (name == "fit") run_fit(o);
  else if (name == "rank") run_rank(o);
  else if (name == "infer") run_infer(o);
  else if (name == "mc") run_mc(o);
  else if (name == "jumps") run_jumps(o);
  else if (name == "price") run_price(o);
  return kOk;
}

int usage_exit(CLI::App& app, const CLI::ParseError& e) {
  const int code = app.exit(e);
  return code == 0 ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = argc - 1; k >= 1; --k) args.emplace_back(argv[k]);  // CLI11 takes them reversed

  // First pass: find the subcommand, the config file and the flags given.
  auto first = std::make_unique<Cli>();
  try {
    first->app.parse(std::vector<std::string>(args));
  } catch (const CLI::ParseError& e) {
    return usage_exit(first->app, e);
  }
  CLI::App* sub = first->selected();
  const std::string name = sub->get_name();

  // Config entries fill options that were not given on the command line.
  std::vector<std::string> extra;
  if (!first->o.config.empty()) {
    try {
      for (const auto& [key, value] : cli::read_config_file(first->o.config)) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") {
          std::cerr << "nsbfm " << name << ": unknown key '" << key << "' in " << first->o.config << "\n";
          return kUsage;
        }
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
          if (value == "true" || value == "1") extra.push_back("--" + key);
        } else {
          extra.push_back("--" + key);
          extra.push_back(value);
        }
      }
    } catch (const std::exception& e) {
      std::cerr << "nsbfm: " << e.what() << "\n";
      return kData;
    }
  }
  // Second pass with config values appended after the flags.
  auto cli = std::make_unique<Cli>();
  std::vector<std::string> merged;
  for (auto it = extra.rbegin(); it != extra.rend(); ++it) merged.push_back(*it);
  merged.insert(merged.end(), args.begin(), args.end());
  try {
    cli->app.parse(merged);
  } catch (const CLI::ParseError& e) {
    return usage_exit(cli->app, e);
  }
  const Options& o = cli->o;
  if (o.threads > 0) set_num_threads(o.threads);
  const auto options = resolved_options(cli->selected());

  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  std::string error;
  try {
    make_dir(o.out);
    code = dispatch(name, o);
  } catch (const UsageError& e) {
    code = kUsage;
    error = e.what();
  } catch (const ParseError& e) {
    code = kData;
    error = e.what();
  } catch (const IoError& e) {
    code = kData;
    error = e.what();
  } catch (const std::invalid_argument& e) {
    code = kData;
    error = e.what();
  } catch (const std::exception& e) {
    code = kNumerical;
    error = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!error.empty()) std::cerr << "nsbfm " << name << ": " << error << "\n";
  try {
    if (fs::is_directory(o.out)) write_manifest(o.out, name, options, seconds, code, error);
  } catch (const std::exception& e) {
    std::cerr << "nsbfm: could not write manifest: " << e.what() << "\n";
  }
  return code;
}
