#include "nsbfm/montecarlo.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nsbfm/csv.hpp"
#include "nsbfm/parallel.hpp"

namespace nsbfm {

void McConfig::validate() const {
  spec.validate();
  if (n_replications < 1) throw std::invalid_argument("number of replications must be at least 1");
  if (select_rank && k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  estimation.validate();
}

McReplication replication_metrics(const SimulatedPanel& sim, const FitResult& fit) {
  const Panel& panel = sim.panel;
  McReplication m;
  m.converged = fit.converged;
  m.iterations = fit.n_iterations;
  m.mae1 = (fit.zhat - sim.z_true).cwiseAbs().mean();
  const Eigen::MatrixXd xb_hat = covariate_index(panel, fit.params.b);
  const Eigen::MatrixXd xb = covariate_index(panel, sim.truth.b);
  m.mae2 = panel.n_covariates() > 0 ? (xb_hat - xb).cwiseAbs().mean() : 0.0;
  const Eigen::MatrixXd cc_hat = fit.params.lambda * fit.params.f.transpose();
  const Eigen::MatrixXd cc = sim.truth.lambda * sim.truth.f.transpose();
  m.mae3 = (cc_hat - cc).cwiseAbs().mean();
  if (panel.n_covariates() > 0) {
    const Eigen::MatrixXd db = fit.params.b - sim.truth.b;
    m.mae4 = db.cwiseAbs().mean();
    m.mae4_euclid = db.rowwise().norm().mean();
  }
  return m;
}

McReport run_mc(const McConfig& cfg, const McEstimator& estimator, const McObserver& observer) {
  cfg.validate();
  const auto m = static_cast<std::size_t>(cfg.n_replications);
  std::vector<McReplication> rows(m);
  const Regime regime =
      cfg.spec.dgp_case == DgpCase::Cointegrated ? Regime::Cointegrated : Regime::Nonstationary;

  parallel_for(cfg.n_replications, [&](std::ptrdiff_t j) {
    McReplication& row = rows[static_cast<std::size_t>(j)];
    try {
      DgpSpec spec = cfg.spec;
      spec.replication = static_cast<std::uint32_t>(j);
      const SimulatedPanel sim = simulate(spec);
      EstimationConfig est = cfg.estimation;
      est.seed = cfg.spec.seed ^ (static_cast<std::uint64_t>(j) << 32);
      double r_hat = std::numeric_limits<double>::quiet_NaN();
      if (cfg.select_rank)
        r_hat = static_cast<double>(select_rank(sim.panel, spec.link, cfg.k_max, regime, est).r_hat);
      est.n_factors = DgpSpec::kFactors;
      const FitResult f = estimator ? estimator(sim, est) : fit(sim.panel, spec.link, est);
      row = replication_metrics(sim, f);
      row.r_hat = r_hat;
      if (observer) observer(static_cast<int>(j), sim, f);
    } catch (const std::exception& e) {
      row = McReplication{};
      row.failed = true;
      row.error = e.what();
    }
    row.replication = static_cast<int>(j);
  });

  McReport rep;
  int ok = 0;
  int rank_true = 0;
  for (const auto& row : rows) {
    if (row.failed) {
      ++rep.n_failed;
      continue;
    }
    ++ok;
    if (!row.converged) ++rep.n_unconverged;
    rep.mae1 += row.mae1;
    rep.mae2 += row.mae2;
    rep.mae3 += row.mae3;
    rep.mae4 += row.mae4;
    rep.mae4_euclid += row.mae4_euclid;
    rep.mean_rhat += row.r_hat;
    if (row.r_hat == static_cast<double>(DgpSpec::kFactors)) ++rank_true;
  }
  if (ok > 0) {
    const double d = ok;
    rep.mae1 /= d;
    rep.mae2 /= d;
    rep.mae3 /= d;
    rep.mae4 /= d;
    rep.mae4_euclid /= d;
    rep.mean_rhat /= d;
    rep.share_rhat_true = rank_true / d;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.mae1 = rep.mae2 = rep.mae3 = rep.mae4 = rep.mae4_euclid = rep.mean_rhat = rep.share_rhat_true = nan;
  }
  if (!cfg.select_rank) {
    rep.mean_rhat = std::numeric_limits<double>::quiet_NaN();
    rep.share_rhat_true = std::numeric_limits<double>::quiet_NaN();
  }
  rep.per_replication = std::move(rows);
  return rep;
}

void write_mc_csv(const McReport& report, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : report.per_replication) {
    rows.push_back({std::to_string(r.replication), r.failed ? "1" : "0", r.converged ? "1" : "0",
                    std::to_string(r.iterations), csv::format_double(r.mae1), csv::format_double(r.mae2),
                    csv::format_double(r.mae3), csv::format_double(r.mae4), csv::format_double(r.mae4_euclid),
                    csv::format_double(r.r_hat)});
  }
  csv::write_table(path,
                   {"replication", "failed", "converged", "iterations", "mae1", "mae2", "mae3", "mae4",
                    "mae4_euclid", "r_hat"},
                   rows);
}

void print_mc_table(const McConfig& cfg, const McReport& report, std::ostream& os) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s / %s, N = %ld, T = %ld, M = %d (failed %d, unconverged %d)\n",
                cfg.spec.dgp_case == DgpCase::Cointegrated ? "Cointegration" : "Nonstationary",
                cfg.spec.link == LinkKind::Logit ? "Logit" : "Probit", static_cast<long>(cfg.spec.n_units),
                static_cast<long>(cfg.spec.n_periods), cfg.n_replications, report.n_failed, report.n_unconverged);
  os << buf;
  const std::pair<const char*, double> lines[] = {{"r_hat", report.mean_rhat}, {"MAE 1", report.mae1},
                                                  {"MAE 2", report.mae2},      {"MAE 3", report.mae3},
                                                  {"MAE 4", report.mae4}};
  for (const auto& [name, v] : lines) {
    std::snprintf(buf, sizeof buf, "  %-6s %8.4f\n", name, v);
    os << buf;
  }
}

}  // namespace nsbfm
