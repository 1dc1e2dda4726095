// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; with none, all ten run. Progress goes to
// stderr, the verdict lines to stdout.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "grid_oracle.hpp"
#include "nsbfm/dgp.hpp"
#include "nsbfm/empirics.hpp"
#include "nsbfm/inference.hpp"
#include "nsbfm/linkfn.hpp"
#include "nsbfm/mle.hpp"
#include "nsbfm/montecarlo.hpp"
#include "nsbfm/parallel.hpp"
#include "nsbfm/rng.hpp"

using namespace nsbfm;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void progress(const std::string& msg) {
  static const auto start = std::chrono::steady_clock::now();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "[%7.1fs] %s\n", s, msg.c_str());
}

// ---- identification invariants shared by every fit ---------------------------

struct InvariantCheck {
  double f_dev = 0.0;     // max |F'F/T² - I|
  double off_diag = 0.0;  // max |offdiag Λ'Λ/N| / trace
  bool ordered = true;
  int fits = 0;

  void add(const FitResult& fit) {
    const Index r = fit.params.n_factors();
    if (r == 0) return;
    const double n = static_cast<double>(fit.params.lambda.rows());
    const double t = static_cast<double>(fit.params.f.rows());
    const Eigen::MatrixXd ff = fit.params.f.transpose() * fit.params.f / (t * t);
    f_dev = std::max(f_dev, (ff - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd ll = fit.params.lambda.transpose() * fit.params.lambda / n;
    const double tr = ll.trace();
    for (Index a = 0; a < r; ++a)
      for (Index b = 0; b < r; ++b)
        if (a != b) off_diag = std::max(off_diag, tr > 0.0 ? std::fabs(ll(a, b)) / tr : std::fabs(ll(a, b)));
    for (Index a = 1; a < r; ++a) ordered = ordered && ll(a - 1, a - 1) >= ll(a, a);
    ++fits;
  }
  void merge(const InvariantCheck& o) {
    f_dev = std::max(f_dev, o.f_dev);
    off_diag = std::max(off_diag, o.off_diag);
    ordered = ordered && o.ordered;
    fits += o.fits;
  }
};

InvariantCheck g_invariants;

McConfig mc_config(DgpCase c, Index n, Index t, int m, bool rank) {
  McConfig cfg;
  cfg.spec.dgp_case = c;
  cfg.spec.n_units = n;
  cfg.spec.n_periods = t;
  cfg.spec.link = LinkKind::Logit;
  cfg.spec.seed = 20240501;
  cfg.n_replications = m;
  cfg.k_max = 4;
  cfg.select_rank = rank;
  return cfg;
}

double mean_over(const McReport& rep, std::size_t first_k, double McReplication::*field) {
  double s = 0.0;
  int n = 0;
  for (std::size_t j = 0; j < std::min(first_k, rep.per_replication.size()); ++j) {
    const auto& row = rep.per_replication[j];
    if (row.failed) continue;
    s += row.*field;
    ++n;
  }
  return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
}

int failed_in(const McReport& rep, std::size_t first_k) {
  int n = 0;
  for (std::size_t j = 0; j < std::min(first_k, rep.per_replication.size()); ++j) n += rep.per_replication[j].failed;
  return n;
}

// Runs an MC design and folds every fit into the invariant check.
McReport run_design(const McConfig& cfg, const McObserver& extra = {}) {
  std::vector<InvariantCheck> per(static_cast<std::size_t>(cfg.n_replications));
  const auto rep = run_mc(cfg, {}, [&](int j, const SimulatedPanel& sim, const FitResult& fit) {
    per[static_cast<std::size_t>(j)].add(fit);
    if (extra) extra(j, sim, fit);
  });
  for (const auto& p : per) g_invariants.merge(p);
  return rep;
}

// ---- criteria 1, 3 and 7: the Case 2 design at N = T = 300 -----------------

struct CoverageTally {
  long covered = 0;
  long cells = 0;
};

McReport g_case2_300;
bool g_case2_300_done = false;
double g_coverage = std::numeric_limits<double>::quiet_NaN();
long g_coverage_cells = 0;

void ensure_case2_300(int m) {
  if (g_case2_300_done) return;
  progress(fmt("Case 2, N = T = 300, M = %d", m));
  std::vector<CoverageTally> tally(static_cast<std::size_t>(m));
  const auto observer = [&](int j, const SimulatedPanel& sim, const FitResult& fit) {
    const auto report = covariances(sim.panel, fit, LinkKind::Logit);
    std::set<Index> bad_units(report.degenerate_units.begin(), report.degenerate_units.end());
    bad_units.insert(fit.diagnostics.non_interior_units.begin(), fit.diagnostics.non_interior_units.end());
    std::set<Index> bad_periods(report.degenerate_periods.begin(), report.degenerate_periods.end());
    bad_periods.insert(fit.diagnostics.non_interior_periods.begin(), fit.diagnostics.non_interior_periods.end());
    const Eigen::MatrixXd truth = sim.truth.lambda * sim.truth.f.transpose();
    auto& c = tally[static_cast<std::size_t>(j)];
    for (Index i = 0; i < sim.panel.n_units(); ++i) {
      if (bad_units.count(i)) continue;
      for (Index t = 0; t < sim.panel.n_periods(); ++t) {
        if (bad_periods.count(t)) continue;
        const auto iv = common_component_interval(sim.panel, fit, report, i, t, 0.95);
        c.covered += (truth(i, t) >= iv.lower && truth(i, t) <= iv.upper) ? 1 : 0;
        ++c.cells;
      }
    }
  };
  g_case2_300 = run_design(mc_config(DgpCase::Cointegrated, 300, 300, m, false), observer);
  long covered = 0;
  for (const auto& c : tally) {
    covered += c.covered;
    g_coverage_cells += c.cells;
  }
  g_coverage = g_coverage_cells > 0 ? static_cast<double>(covered) / static_cast<double>(g_coverage_cells)
                                    : std::numeric_limits<double>::quiet_NaN();
  g_case2_300_done = true;
}

Verdict criterion1() {
  ensure_case2_300(100);
  const double mae4 = mean_over(g_case2_300, 50, &McReplication::mae4);
  const double mae1 = mean_over(g_case2_300, 50, &McReplication::mae1);
  const int failed = failed_in(g_case2_300, 50);
  Verdict v;
  v.pass = mae4 >= 0.10 && mae4 <= 0.18 && mae1 >= 0.25 && mae1 <= 0.55 && failed == 0;
  v.detail = fmt("Case 2 logit N=T=300 M=50: MAE4 %.4f in [0.10, 0.18], MAE1 %.4f in [0.25, 0.55], %d failed", mae4,
                 mae1, failed);
  return v;
}

Verdict criterion2() {
  progress("Case 1, N = T = 500, M = 50, rank selection with k_max = 4");
  auto cfg = mc_config(DgpCase::Nonstationary, 500, 500, 50, true);
  // Only r̂ is assessed here; the true-rank fit is replaced by the truth.
  const auto rep = run_mc(cfg, [](const SimulatedPanel& sim, const EstimationConfig&) {
    FitResult f;
    f.params = sim.truth;
    f.zhat = sim.z_true;
    f.converged = true;
    return f;
  });
  std::map<int, int> counts;
  int exact = 0;
  int ok = 0;
  for (const auto& row : rep.per_replication) {
    if (row.failed) continue;
    ++ok;
    counts[static_cast<int>(row.r_hat)] += 1;
    exact += row.r_hat == 2.0;
  }
  const double share = ok > 0 ? static_cast<double>(exact) / ok : 0.0;
  std::string dist;
  for (const auto& [k, c] : counts) dist += fmt(" %d:%d", k, c);
  Verdict v;
  v.pass = rep.n_failed == 0 && rep.mean_rhat >= 1.9 && rep.mean_rhat <= 2.1 && share >= 0.9;
  v.detail = fmt("Case 1 logit N=T=500 M=50 k_max=4: mean r_hat %.3f in [1.9, 2.1], share r_hat=2 %.2f >= 0.90, "
                 "counts%s, %d failed",
                 rep.mean_rhat, share, dist.c_str(), rep.n_failed);
  return v;
}

Verdict criterion3() {
  ensure_case2_300(100);
  progress("Case 2, N = T = 100, M = 50");
  const auto r100 = run_design(mc_config(DgpCase::Cointegrated, 100, 100, 50, false));
  progress("Case 2, N = T = 500, M = 50");
  const auto r500 = run_design(mc_config(DgpCase::Cointegrated, 500, 500, 50, false));
  const double m100 = r100.mae4;
  const double m300 = mean_over(g_case2_300, 50, &McReplication::mae4);
  const double m500 = r500.mae4;

  double case1[3];
  const Index ts[3] = {100, 300, 500};
  for (int k = 0; k < 3; ++k) {
    progress(fmt("Case 1, N = 100, T = %d, M = 50 (reported only)", static_cast<int>(ts[k])));
    case1[k] = run_design(mc_config(DgpCase::Nonstationary, 100, ts[k], 50, false)).mae1;
  }
  const int failed = r100.n_failed + r500.n_failed + failed_in(g_case2_300, 50);
  Verdict v;
  v.pass = m100 > m300 && m300 > m500 && failed == 0;
  v.detail = fmt("Case 2 MAE4 over N=T 100/300/500: %.4f > %.4f > %.4f; Case 1 N=100 MAE1 over T 100/300/500: "
                 "%.4f, %.4f, %.4f (not asserted)",
                 m100, m300, m500, case1[0], case1[1], case1[2]);
  return v;
}

Verdict criterion4() {
  progress("identification invariants on additional fits");
  InvariantCheck local;
  for (auto c : {DgpCase::Nonstationary, DgpCase::Cointegrated})
    for (auto kind : {LinkKind::Logit, LinkKind::Probit})
      for (Index r : {1, 2, 4}) {
        DgpSpec spec;
        spec.dgp_case = c;
        spec.n_units = 80;
        spec.n_periods = 120;
        spec.link = kind;
        spec.seed = 99;
        const auto sim = simulate(spec);
        EstimationConfig cfg;
        cfg.n_factors = r;
        local.add(fit(sim.panel, kind, cfg));
      }
  g_invariants.merge(local);
  const auto& g = g_invariants;
  Verdict v;
  v.pass = g.f_dev <= 1e-8 && g.off_diag <= 1e-8 && g.ordered && g.fits > 0;
  v.detail = fmt("%d fits: max |F'F/T^2 - I| %.2e, max off-diagonal/trace %.2e, diagonal ordered: %s", g.fits, g.f_dev,
                 g.off_diag, g.ordered ? "yes" : "no");
  return v;
}

Verdict criterion5() {
  progress("micro-instance oracle comparison");
  int pass = 0;
  int fit_flagged = 0;
  int oracle_edge = 0;
  int wider_box_better = 0;
  double worst_obj = 0.0;
  double worst_sup = 0.0;
  double min_excess = std::numeric_limits<double>::infinity();  // fit minus oracle
  for (std::uint32_t rep = 0; rep < 20; ++rep) {
    CounterRng rng(5150, rep, 0);
    Eigen::MatrixXd lambda(4, 1);
    Eigen::MatrixXd f(4, 1);
    for (Index i = 0; i < 4; ++i) lambda(i, 0) = rng.normal();
    for (Index t = 0; t < 4; ++t) f(t, 0) = rng.normal();
    const Eigen::MatrixXd y = draw_outcomes(lambda * f.transpose(), LinkKind::Logit, 5150, rep);
    const Panel panel(y, {});
    EstimationConfig cfg;
    cfg.n_factors = 1;
    const FitResult res = fit(panel, LinkKind::Logit, cfg);
    const auto oracle = test::grid_search_rank_one(y, LinkKind::Logit);
    const auto wide = test::grid_search_rank_one(y, LinkKind::Logit, 6.0, 0.5);
    const double obj_gap = std::fabs(res.final_loglik() - oracle.objective);
    const Eigen::MatrixXd common = res.params.lambda * res.params.f.transpose();
    const double sup_gap = (common - oracle.common).cwiseAbs().maxCoeff();
    worst_obj = std::max(worst_obj, obj_gap);
    worst_sup = std::max(worst_sup, sup_gap);
    min_excess = std::min(min_excess, res.final_loglik() - oracle.objective);
    pass += obj_gap <= 1e-3 && sup_gap <= 0.05;
    fit_flagged += !res.diagnostics.non_interior_units.empty() || !res.diagnostics.non_interior_periods.empty();
    oracle_edge += oracle.on_boundary;
    wider_box_better += wide.objective > oracle.objective + 1e-3;
  }
  Verdict v;
  v.pass = pass == 20;
  v.detail = fmt("%d/20 within tolerance; worst objective gap %.3g, worst sup gap %.3g; smallest fit-minus-oracle objective %.3g; "
                 "fits at the index bound %d/20, oracle optimum on the box edge %d/20, "
                 "larger box raises the oracle objective %d/20",
                 pass, worst_obj, worst_sup, min_excess, fit_flagged, oracle_edge, wider_box_better);
  return v;
}

Verdict criterion6() {
  progress("link kernel identities");
  double worst_k = 0.0;
  double worst_d = 0.0;
  bool finite = true;
  double worst_fd = 0.0;
  for (auto kind : {LinkKind::Logit, LinkKind::Probit}) {
    const double lim = kind == LinkKind::Logit ? 700.0 : 38.0;
    for (double z = -lim; z <= lim; z += lim / 20000.0) {
      const LinkEval e = evaluate(z, kind);
      // Log-domain comparison keeps tails where Ψ or 1 - Ψ underflows exact.
      const double log_m = std::log(e.m);
      const double lk = 2.0 * log_m + e.loglik1 + e.loglik0;
      const double ld = log_m + e.loglik1 + e.loglik0;
      worst_k = std::max(worst_k, std::fabs(std::expm1(e.log_k - lk)));
      worst_d = std::max(worst_d, std::fabs(std::expm1(e.log_psidot - ld)));
    }
    if (kind == LinkKind::Probit) {
      for (double z : {-37.0, 37.0})
        for (double y : {0.0, 1.0}) {
          const double l = cell_loglik(y, z, kind);
          finite = finite && std::isfinite(l);
          const double h = 1e-5;
          const double fd = (cell_loglik(y, z + h, kind) - cell_loglik(y, z - h, kind)) / (2.0 * h);
          const double an = cell_terms(y, z, kind).score_weight;
          worst_fd = std::max(worst_fd, std::fabs(fd - an) / std::max(1.0, std::fabs(an)));
        }
    }
  }
  Verdict v;
  v.pass = worst_k <= 1e-10 && worst_d <= 1e-10 && finite && worst_fd <= 1e-6;
  v.detail = fmt("max rel error K vs M^2 Psi(1-Psi) %.2e, Psi' vs M Psi(1-Psi) %.2e; probit at +-37 finite: %s, "
                 "score vs finite difference %.2e",
                 worst_k, worst_d, finite ? "yes" : "no", worst_fd);
  return v;
}

Verdict criterion7() {
  ensure_case2_300(100);
  Verdict v;
  v.pass = g_coverage >= 0.90 && g_coverage <= 0.98 && g_case2_300.n_failed == 0;
  v.detail = fmt("Case 2 logit N=T=300 M=100: coverage of 95%% common-component intervals %.4f in [0.90, 0.98] "
                 "over %ld cells, %d failed",
                 g_coverage, g_coverage_cells, g_case2_300.n_failed);
  return v;
}

// Mean of the estimator over `paths` random walks of length t_len, with its
// standard error.
std::pair<double, double> local_time_mean(int paths, Index t_len, std::uint32_t first_path) {
  std::vector<double> lt(static_cast<std::size_t>(paths));
  parallel_for(paths, [&](std::ptrdiff_t p) {
    CounterRng rng(8080, first_path + static_cast<std::uint32_t>(p), 0);
    Eigen::VectorXd z(t_len);
    double level = 0.0;
    for (Index t = 0; t < t_len; ++t) z(t) = (level += rng.normal());
    lt[static_cast<std::size_t>(p)] = local_time(z, 1.0, LinkKind::Logit);
  });
  double mean = 0.0;
  for (double v : lt) mean += v;
  mean /= paths;
  double ss = 0.0;
  for (double v : lt) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (paths - 1) / paths)};
}

Verdict criterion8() {
  progress("local time of random walks");
  const Index t_len = 100000;
  const auto [mean, se] = local_time_mean(200, t_len, 0);
  // Supplementary: a longer run shows whether a miss is sampling noise.
  const auto [mean_big, se_big] = local_time_mean(2000, t_len, 0);
  const double target = std::sqrt(2.0 / std::numbers::pi);
  Verdict v;
  v.pass = std::fabs(mean / target - 1.0) <= 0.05;
  v.detail = fmt("mean over 200 paths of length %d: %.4f (se %.4f) vs %.4f, %.2f%% off, limit 5%%; "
                 "2000 paths: %.4f (se %.4f)",
                 static_cast<int>(t_len), mean, se, target, 100.0 * std::fabs(mean / target - 1.0), mean_big, se_big);
  return v;
}

Verdict criterion9() {
  progress("jump test size");
  const int days = 10000;
  const int m = 390;
  std::vector<int> rejected(days);
  parallel_for(days, [&](std::ptrdiff_t d) {
    CounterRng rng(9090, static_cast<std::uint32_t>(d), 0);
    std::vector<double> r(m);
    const double sd = 0.01 / std::sqrt(static_cast<double>(m));
    for (auto& x : r) x = sd * rng.normal();
    rejected[static_cast<std::size_t>(d)] = detect_jumps(r, 0.95).indicator;
  });
  int n_rej = 0;
  for (int x : rejected) n_rej += x;
  const double rate = static_cast<double>(n_rej) / days;
  Verdict v;
  v.pass = rate >= 0.03 && rate <= 0.07;
  v.detail = fmt("rejection rate on %d jump-free days (M=%d) at the 95%% level: %.4f in [0.03, 0.07]", days, m, rate);
  return v;
}

Verdict criterion10() {
  progress("pricing machinery");
  const int trials = 500;
  const Index n = 25;
  const Index t = 240;
  std::vector<long> dr2_pos(trials);
  std::vector<int> grs_drop(trials);
  std::vector<int> grs_ok(trials);
  parallel_for(trials, [&](std::ptrdiff_t k) {
    CounterRng rng(1010, static_cast<std::uint32_t>(k), 0);
    Eigen::MatrixXd ff5(t, 5);
    Eigen::MatrixXd extra(t, 1);
    for (Index j = 0; j < ff5.size(); ++j) ff5.data()[j] = 0.1 + rng.normal();
    for (Index s = 0; s < t; ++s) extra(s, 0) = 0.3 + rng.normal();
    Eigen::MatrixXd excess(n, t);
    for (Index i = 0; i < n; ++i) {
      Eigen::VectorXd beta(5);
      for (Index j = 0; j < 5; ++j) beta(j) = 0.5 + 0.5 * rng.normal();
      const double gamma = 0.5 + rng.uniform();
      for (Index s = 0; s < t; ++s) excess(i, s) = ff5.row(s).dot(beta) + gamma * extra(s, 0) + rng.normal();
    }
    const auto rep = price(excess, ff5, extra);
    dr2_pos[static_cast<std::size_t>(k)] = ((rep.r2_augmented - rep.r2_base).array() > 0.0).count();
    grs_ok[static_cast<std::size_t>(k)] = rep.grs_base.computed && rep.grs_augmented.computed;
    grs_drop[static_cast<std::size_t>(k)] = rep.grs_augmented.statistic < rep.grs_base.statistic;
  });
  long pos = 0;
  int drop = 0;
  int computed = 0;
  for (int k = 0; k < trials; ++k) {
    pos += dr2_pos[static_cast<std::size_t>(k)];
    drop += grs_drop[static_cast<std::size_t>(k)] && grs_ok[static_cast<std::size_t>(k)];
    computed += grs_ok[static_cast<std::size_t>(k)];
  }
  const double share_r2 = static_cast<double>(pos) / static_cast<double>(trials * n);
  const double share_grs = static_cast<double>(drop) / trials;

  // GRS by hand on a fixed N = 2, K = 1, T = 20 sample.
  const Index th = 20;
  Eigen::MatrixXd e(th, 2);
  Eigen::MatrixXd f(th, 1);
  for (Index s = 0; s < th; ++s) {
    const double u = static_cast<double>(s);
    e(s, 0) = std::sin(1.3 * u + 0.2);
    e(s, 1) = std::cos(0.7 * u) + 0.3 * std::sin(2.1 * u);
    f(s, 0) = 0.2 + std::sin(0.9 * u + 1.0);
  }
  const Eigen::Vector2d alpha(0.15, -0.05);
  const auto g = grs_test(alpha, e, f);
  double s00 = 0.0, s01 = 0.0, s11 = 0.0, mu = 0.0;
  for (Index s = 0; s < th; ++s) {
    s00 += e(s, 0) * e(s, 0);
    s01 += e(s, 0) * e(s, 1);
    s11 += e(s, 1) * e(s, 1);
    mu += f(s, 0);
  }
  s00 /= 18.0;
  s01 /= 18.0;
  s11 /= 18.0;
  mu /= 20.0;
  double var = 0.0;
  for (Index s = 0; s < th; ++s) var += (f(s, 0) - mu) * (f(s, 0) - mu);
  var /= 19.0;
  const double qa =
      (s11 * alpha(0) * alpha(0) - 2.0 * s01 * alpha(0) * alpha(1) + s00 * alpha(1) * alpha(1)) / (s00 * s11 - s01 * s01);
  const double hand = 17.0 / 2.0 * qa / (1.0 + mu * mu / var);
  const double hand_err = std::fabs(g.statistic - hand) / std::max(1.0, std::fabs(hand));

  Verdict v;
  v.pass = share_r2 >= 0.95 && share_grs >= 0.95 && computed == trials && g.computed && hand_err <= 1e-10;
  v.detail = fmt("%d trials: share of assets with positive delta R^2 %.4f, share of trials with lower augmented GRS "
                 "%.4f; hand-computed GRS %.10f vs %.10f (rel error %.1e)",
                 trials, share_r2, share_grs, hand, g.statistic, hand_err);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));
  if (wanted.empty())
    for (int k = 1; k <= 10; ++k) wanted.insert(k);

  // Cheap criteria first; the Monte Carlo designs share fits, and criterion 4
  // folds in every fit made before it runs, so it goes last.
  const std::vector<std::pair<int, Verdict (*)()>> order = {
      {6, criterion6}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {5, criterion5}, {1, criterion1},
      {7, criterion7}, {3, criterion3}, {2, criterion2}, {4, criterion4}};
  std::map<int, Verdict> results;
  for (const auto& [id, fn] : order) {
    if (!wanted.count(id)) continue;
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("error: ") + e.what()};
    }
    progress(fmt("criterion %d: %s", id, results[id].pass ? "PASS" : "FAIL"));
  }
  int failures = 0;
  for (const auto& [id, v] : results) {
    std::printf("criterion %2d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    failures += !v.pass;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
