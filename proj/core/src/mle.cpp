#include "nsbfm/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nsbfm/error.hpp"
#include "nsbfm/parallel.hpp"
#include "nsbfm/rng.hpp"

namespace nsbfm {

namespace {

constexpr double kStepTol = 1e-9;
constexpr double kRidgeCeiling = 1e-2;  // relative to trace/dim
constexpr int kMaxHalvings = 60;
constexpr std::uint64_t kRestartStream = 0x5245u;

double index_bound(LinkKind kind) { return kind == LinkKind::Logit ? 50.0 : 30.0; }

// Objective, score and Fisher matrix of one block at the index vector z.
struct BlockEval {
  double objective = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd fisher;
  bool finite = true;
  double max_abs_index = 0.0;
};

class BlockProblem {
 public:
  BlockProblem(const Eigen::Ref<const Eigen::MatrixXd>& w, const Eigen::Ref<const Eigen::VectorXd>& offset,
               const Eigen::Ref<const Eigen::VectorXd>& y, LinkKind kind)
      : w_(w), offset_(offset), y_(y), kind_(kind), sw_(w.cols()), fw_(w.cols()) {}

  Eigen::VectorXd index(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd z = offset_;
    z.noalias() += w_.transpose() * theta;
    return z;
  }

  void evaluate(const Eigen::VectorXd& theta, BlockEval& out) {
    const Eigen::VectorXd z = index(theta);
    double s = 0.0;
    for (Index j = 0; j < z.size(); ++j) {
      const CellTerms c = cell_terms(y_(j), z(j), kind_);
      s += c.loglik;
      sw_(j) = c.score_weight;
      fw_(j) = c.fisher_weight;
    }
    out.objective = s;
    out.max_abs_index = z.size() > 0 ? z.cwiseAbs().maxCoeff() : 0.0;
    out.score.noalias() = w_ * sw_;
    out.fisher.noalias() = w_ * fw_.asDiagonal() * w_.transpose();
    out.finite = std::isfinite(s) && out.score.allFinite() && out.fisher.allFinite();
  }

 private:
  Eigen::Ref<const Eigen::MatrixXd> w_;
  Eigen::Ref<const Eigen::VectorXd> offset_;
  Eigen::Ref<const Eigen::VectorXd> y_;
  LinkKind kind_;
  Eigen::VectorXd sw_;
  Eigen::VectorXd fw_;
};

// Damped direction (I + ridge) d = s with ridge escalation. Returns false when
// every ridge up to the ceiling fails.
bool fisher_direction(const BlockEval& ev, double ridge_floor, Eigen::VectorXd& d) {
  const Index p = ev.score.size();
  const double tr = ev.fisher.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) return false;
  const double scale = tr / static_cast<double>(p);
  double ridge = ridge_floor * scale;
  const double ceiling = kRidgeCeiling * scale;
  Eigen::MatrixXd a(p, p);
  for (;;) {
    a = ev.fisher;
    a.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      d = llt.solve(ev.score);
      if (d.allFinite()) return true;
    }
    ridge = ridge > 0.0 ? ridge * 10.0 : 1e-12 * scale;
    if (ridge > ceiling * (1.0 + 1e-12)) return false;
  }
}

}  // namespace

void EstimationConfig::validate() const {
  if (n_factors < 0) throw std::invalid_argument("number of factors must be non-negative");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_outer_iterations < 1) throw std::invalid_argument("max outer iterations must be at least 1");
  if (max_inner_newton_steps < 1) throw std::invalid_argument("max inner steps must be at least 1");
  if (!(ridge_floor >= 0.0)) throw std::invalid_argument("ridge floor must be non-negative");
  if (n_restarts < 1) throw std::invalid_argument("number of restarts must be at least 1");
}

double loglik(const Panel& panel, const ModelParams& params, LinkKind kind) {
  const Eigen::MatrixXd z = single_index(panel, params);
  double total = 0.0;
  for (Index i = 0; i < panel.n_units(); ++i) {
    double row = 0.0;
    for (Index t = 0; t < panel.n_periods(); ++t) row += cell_loglik(panel.y(i, t), z(i, t), kind);
    total += row;
  }
  return total;
}

BlockUpdate solve_block(const Eigen::Ref<const Eigen::MatrixXd>& design_t,
                        const Eigen::Ref<const Eigen::VectorXd>& offset,
                        const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& start,
                        LinkKind kind, const EstimationConfig& cfg) {
  if (design_t.cols() != offset.size() || design_t.cols() != y.size() || design_t.rows() != start.size())
    throw std::invalid_argument("block dimensions do not agree");
  BlockProblem prob(design_t, offset, y, kind);
  BlockUpdate out;
  out.value = start;
  const Index p = start.size();

  BlockEval ev;
  ev.score.resize(p);
  ev.fisher.resize(p, p);
  prob.evaluate(start, ev);
  out.start_objective = ev.objective;
  out.objective = ev.objective;
  if (p == 0) {
    out.converged = true;
    return out;
  }
  if (!ev.finite) {
    out.degenerate = true;
    return out;
  }

  BlockEval trial_ev;
  trial_ev.score.resize(p);
  trial_ev.fisher.resize(p, p);
  Eigen::VectorXd d(p);
  Eigen::VectorXd trial(p);
  // Every iterate keeps |z| within the bound; a start already outside it
  // (user-supplied values) may not move further out.
  const double bound = std::max(index_bound(kind), ev.max_abs_index);
  for (int step = 0; step < cfg.max_inner_newton_steps; ++step) {
    if (!fisher_direction(ev, cfg.ridge_floor, d)) {
      out.degenerate = true;
      break;
    }
    const double tol = kStepTol * (1.0 + out.value.lpNorm<Eigen::Infinity>());
    if (d.lpNorm<Eigen::Infinity>() <= tol) {
      out.converged = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, alpha *= 0.5) {
      trial = out.value + alpha * d;
      prob.evaluate(trial, trial_ev);
      if (trial_ev.finite && trial_ev.objective >= ev.objective && trial_ev.max_abs_index <= bound) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent left at working precision.
      out.converged = true;
      break;
    }
    out.value = trial;
    std::swap(ev, trial_ev);
    out.objective = ev.objective;
    ++out.steps;
    if (alpha * d.lpNorm<Eigen::Infinity>() <= tol) {
      out.converged = true;
      break;
    }
  }
  // Resting on the index bound also means no interior maximiser.
  if (!out.degenerate && (!out.converged || ev.max_abs_index >= bound * (1.0 - 1e-6))) out.non_interior = true;
  return out;
}

BlockUpdate update_factor(const Panel& panel, const ModelParams& params, Index t, LinkKind kind,
                          const EstimationConfig& cfg) {
  params.check_against(panel);
  if (t < 0 || t >= panel.n_periods()) throw std::out_of_range("period index out of range");
  const Eigen::MatrixXd lt = params.lambda.transpose();
  Eigen::VectorXd offset(panel.n_units());
  for (Index i = 0; i < panel.n_units(); ++i)
    offset(i) = panel.n_covariates() > 0 ? panel.x(i, t).dot(params.b.row(i)) : 0.0;
  const Eigen::VectorXd y = panel.y().col(t);
  return solve_block(lt, offset, y, params.f.row(t).transpose(), kind, cfg);
}

BlockUpdate update_unit(const Panel& panel, const ModelParams& params, Index i, LinkKind kind,
                        const EstimationConfig& cfg) {
  params.check_against(panel);
  if (i < 0 || i >= panel.n_units()) throw std::out_of_range("unit index out of range");
  const Index q = panel.n_covariates();
  const Index r = params.n_factors();
  Eigen::MatrixXd g(q + r, panel.n_periods());
  g.topRows(q) = panel.x(i).transpose();
  g.bottomRows(r) = params.f.transpose();
  Eigen::VectorXd start(q + r);
  start.head(q) = params.b.row(i).transpose();
  start.tail(r) = params.lambda.row(i).transpose();
  const Eigen::VectorXd y = panel.y().row(i).transpose();
  return solve_block(g, Eigen::VectorXd::Zero(panel.n_periods()), y, start, kind, cfg);
}

NormalizedFactors normalize(const Eigen::MatrixXd& lambda_star, const Eigen::MatrixXd& f_star) {
  const Index r = lambda_star.cols();
  if (f_star.cols() != r) throw std::invalid_argument("Lambda and F have different factor counts");
  if (r == 0) return {lambda_star, f_star};
  const double n = static_cast<double>(lambda_star.rows());
  const double t = static_cast<double>(f_star.rows());

  const Eigen::MatrixXd sf = f_star.transpose() * f_star / (t * t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(sf);
  const Eigen::VectorXd ev = ef.eigenvalues();
  if (!(ev.maxCoeff() > 0.0) || ev.minCoeff() <= 1e-12 * ev.maxCoeff())
    throw NumericalError("estimated factor matrix is rank deficient; refit with fewer factors");
  const Eigen::MatrixXd& v = ef.eigenvectors();
  const Eigen::MatrixXd sf_half = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
  const Eigen::MatrixXd sf_inv_half = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();

  const Eigen::MatrixXd sl = lambda_star.transpose() * lambda_star / n;
  Eigen::MatrixXd m = sf_half * sl * sf_half;
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(m);
  const Eigen::MatrixXd q = em.eigenvectors().rowwise().reverse();

  NormalizedFactors out{lambda_star * sf_half * q, f_star * sf_inv_half * q};
  for (Index j = 0; j < r; ++j) {
    Index arg = 0;
    out.lambda.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.lambda(arg, j) < 0.0) {
      out.lambda.col(j) *= -1.0;
      out.f.col(j) *= -1.0;
    }
  }
  return out;
}

ModelParams spectral_start(const Panel& panel, LinkKind kind, Index n_factors) {
  const Index n = panel.n_units();
  const Index t = panel.n_periods();
  const Index q = panel.n_covariates();
  if (n_factors < 0 || n_factors > std::min(n, t))
    throw std::invalid_argument("number of factors must lie in [0, min(N, T)]");
  ModelParams p;
  p.b = Eigen::MatrixXd::Zero(n, q);
  p.lambda = Eigen::MatrixXd::Zero(n, n_factors);
  p.f = Eigen::MatrixXd::Zero(t, n_factors);

  // One score step per covariate from zero, coordinate by coordinate.
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(t);
    const Eigen::MatrixXd& x = panel.x(i);
    for (Index k = 0; k < q; ++k) {
      double s = 0.0;
      double info = 0.0;
      for (Index s_ = 0; s_ < t; ++s_) {
        const CellTerms c = cell_terms(panel.y(i, s_), z(s_), kind);
        s += c.score_weight * x(s_, k);
        info += c.fisher_weight * x(s_, k) * x(s_, k);
      }
      if (info > 0.0 && std::isfinite(s / info)) {
        p.b(i, k) = s / info;
        z += p.b(i, k) * x.col(k);
      }
    }
  }
  if (n_factors == 0) return p;

  // Ψ(z) ≈ 1/2 + Ψ'(0) z near zero, so (2y - 1) / (2Ψ'(0)) is a crude index.
  const double slope = 0.5 / link_density(0.0, kind);
  const Eigen::MatrixXd z0 = slope * (2.0 * panel.y().array() - 1.0).matrix();
  const double td = static_cast<double>(t);
  Eigen::MatrixXd v;
  if (t <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z0.transpose() * z0);
    v = es.eigenvectors().rightCols(n_factors).rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z0 * z0.transpose());
    const Eigen::MatrixXd u = es.eigenvectors().rightCols(n_factors).rowwise().reverse();
    v = z0.transpose() * u;
    for (Index j = 0; j < n_factors; ++j) {
      const double nrm = v.col(j).norm();
      if (nrm > 0.0) v.col(j) /= nrm;
    }
  }
  p.f = td * v;
  p.lambda = z0 * v / td;
  return p;
}

FitResult fit_from(const Panel& panel, LinkKind kind, const EstimationConfig& cfg, ModelParams start) {
  cfg.validate();
  start.check_against(panel);
  const Index n = panel.n_units();
  const Index t = panel.n_periods();
  const Index q = panel.n_covariates();
  const Index r = start.n_factors();
  if (q + r == 0) throw std::invalid_argument("model has neither covariates nor factors");

  // Transposed designs so every observation is a contiguous column.
  std::vector<Eigen::MatrixXd> xt(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) xt[static_cast<std::size_t>(i)] = panel.x(i).transpose();
  const Eigen::MatrixXd& y = panel.y();

  ModelParams cur = std::move(start);
  Eigen::MatrixXd offsets = covariate_index(panel, cur.b);
  double last = loglik(panel, cur, kind);
  if (!std::isfinite(last)) throw NumericalError("log-likelihood is not finite at the starting values");

  FitResult res;
  res.loglik_trace.push_back(last);
  const double stop = cfg.tolerance * static_cast<double>(n) * static_cast<double>(t);

  std::vector<BlockUpdate> per_t(static_cast<std::size_t>(t));
  std::vector<BlockUpdate> per_i(static_cast<std::size_t>(n));
  for (int it = 0; it < cfg.max_outer_iterations; ++it) {
    ModelParams next = cur;
    if (r > 0) {
      const Eigen::MatrixXd lt = cur.lambda.transpose();
      parallel_for(t, [&](std::ptrdiff_t s) {
        per_t[static_cast<std::size_t>(s)] =
            solve_block(lt, offsets.col(s), y.col(s), cur.f.row(s).transpose(), kind, cfg);
      });
      for (Index s = 0; s < t; ++s) next.f.row(s) = per_t[static_cast<std::size_t>(s)].value.transpose();
    }
    const Eigen::MatrixXd ft = next.f.transpose();
    parallel_for(n, [&](std::ptrdiff_t i) {
      Eigen::MatrixXd g(q + r, t);
      if (q > 0) g.topRows(q) = xt[static_cast<std::size_t>(i)];
      if (r > 0) g.bottomRows(r) = ft;
      Eigen::VectorXd a(q + r);
      a.head(q) = cur.b.row(i).transpose();
      a.tail(r) = cur.lambda.row(i).transpose();
      per_i[static_cast<std::size_t>(i)] =
          solve_block(g, Eigen::VectorXd::Zero(t), y.row(i).transpose(), a, kind, cfg);
    });
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto& u = per_i[static_cast<std::size_t>(i)];
      next.b.row(i) = u.value.head(q).transpose();
      next.lambda.row(i) = u.value.tail(r).transpose();
      total += u.objective;
    }
    if (!std::isfinite(total)) throw NumericalError("log-likelihood became non-finite during estimation");

    res.n_iterations = it + 1;
    if (total < last) {
      // Only rounding can lower the objective; keep the previous iterate.
      res.converged = true;
      break;
    }
    cur = std::move(next);
    offsets = covariate_index(panel, cur.b);
    res.loglik_trace.push_back(total);
    res.diagnostics = {};
    for (Index s = 0; s < t && r > 0; ++s) {
      if (per_t[static_cast<std::size_t>(s)].degenerate) res.diagnostics.degenerate_periods.push_back(s);
      if (per_t[static_cast<std::size_t>(s)].non_interior) res.diagnostics.non_interior_periods.push_back(s);
    }
    for (Index i = 0; i < n; ++i) {
      if (per_i[static_cast<std::size_t>(i)].degenerate) res.diagnostics.degenerate_units.push_back(i);
      if (per_i[static_cast<std::size_t>(i)].non_interior) res.diagnostics.non_interior_units.push_back(i);
    }
    const bool done = std::fabs(total - last) <= stop;
    last = total;
    if (done) {
      res.converged = true;
      break;
    }
  }

  if (r > 0) {
    NormalizedFactors nf = normalize(cur.lambda, cur.f);
    cur.lambda = std::move(nf.lambda);
    cur.f = std::move(nf.f);
    res.sigma_hat = (cur.lambda.transpose() * cur.lambda).diagonal() / static_cast<double>(n);
  } else {
    res.sigma_hat = Eigen::VectorXd();
  }
  res.params = std::move(cur);
  res.zhat = single_index(panel, res.params);
  return res;
}

FitResult fit(const Panel& panel, LinkKind kind, const EstimationConfig& cfg) {
  cfg.validate();
  const Index r = cfg.n_factors;
  if (r > std::min(panel.n_units(), panel.n_periods()))
    throw std::invalid_argument("number of factors exceeds min(N, T)");
  const ModelParams base = spectral_start(panel, kind, r);

  FitResult best;
  bool have = false;
  for (int k = 0; k < cfg.n_restarts; ++k) {
    ModelParams start = base;
    if (k > 0) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(k), kRestartStream);
      const double ls = r > 0 ? std::sqrt(start.lambda.squaredNorm() / static_cast<double>(start.lambda.size())) : 0.0;
      for (Index j = 0; j < start.lambda.size(); ++j) start.lambda.data()[j] += 0.5 * (ls + 0.1) * rng.normal();
      for (Index j = 0; j < start.f.size(); ++j) start.f.data()[j] += 0.1 * rng.normal();
      for (Index j = 0; j < start.b.size(); ++j) start.b.data()[j] += 0.1 * rng.normal();
    }
    FitResult cand = fit_from(panel, kind, cfg, std::move(start));
    if (!have || cand.final_loglik() > best.final_loglik()) {
      const int restart_index = k;
      best = std::move(cand);
      best.diagnostics.best_restart = restart_index;
      have = true;
    }
  }
  best.diagnostics.restarts = cfg.n_restarts;
  return best;
}

}  // namespace nsbfm
