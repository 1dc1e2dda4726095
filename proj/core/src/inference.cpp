#include "nsbfm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsbfm/parallel.hpp"

namespace nsbfm {

namespace {

void check_fit(const Panel& panel, const FitResult& fit) {
  fit.params.check_against(panel);
  if (fit.zhat.rows() != panel.n_units() || fit.zhat.cols() != panel.n_periods())
    throw std::invalid_argument("fitted index does not match the panel");
}

double two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("coverage level must lie in (0, 1)");
  return normal_quantile(0.5 + 0.5 * level);
}

double squared_residuals(const Panel& panel, const FitResult& fit, LinkKind kind) {
  check_fit(panel, fit);
  double s = 0.0;
  for (Index i = 0; i < panel.n_units(); ++i) {
    double row = 0.0;
    for (Index t = 0; t < panel.n_periods(); ++t) {
      const double e = panel.y(i, t) - link_probability(fit.zhat(i, t), kind);
      row += e * e;
    }
    s += row;
  }
  return s;
}

}  // namespace

Eigen::MatrixXd hessian_unit(const Panel& panel, const FitResult& fit, Index i, LinkKind kind) {
  check_fit(panel, fit);
  if (i < 0 || i >= panel.n_units()) throw std::out_of_range("unit index out of range");
  const Index q = panel.n_covariates();
  const Index r = fit.params.n_factors();
  Eigen::MatrixXd g(panel.n_periods(), q + r);
  g.leftCols(q) = panel.x(i);
  g.rightCols(r) = fit.params.f;
  Eigen::VectorXd k(panel.n_periods());
  for (Index t = 0; t < panel.n_periods(); ++t) k(t) = cell_terms(0.0, fit.zhat(i, t), kind).fisher_weight;
  Eigen::MatrixXd h = -(g.transpose() * k.asDiagonal() * g);
  return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd hessian_period(const Panel& panel, const FitResult& fit, Index t, LinkKind kind) {
  check_fit(panel, fit);
  if (t < 0 || t >= panel.n_periods()) throw std::out_of_range("period index out of range");
  const Eigen::MatrixXd& lam = fit.params.lambda;
  Eigen::VectorXd k(panel.n_units());
  for (Index i = 0; i < panel.n_units(); ++i) k(i) = cell_terms(0.0, fit.zhat(i, t), kind).fisher_weight;
  Eigen::MatrixXd h = -(lam.transpose() * k.asDiagonal() * lam);
  return 0.5 * (h + h.transpose());
}

BlockCovariance covariance_from_hessian(const Eigen::MatrixXd& hessian) {
  const Index p = hessian.rows();
  BlockCovariance out;
  out.cov = Eigen::MatrixXd::Zero(p, p);
  if (p == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hessian);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tr = std::max(ev.sum(), 0.0);
  const double cut = kDegenerateRatio * tr;
  out.degenerate = !(tr > 0.0) || ev.minCoeff() < cut;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
  for (Index j = 0; j < p; ++j)
    if (ev(j) > cut && ev(j) > 0.0) inv(j) = 1.0 / ev(j);
  const Eigen::MatrixXd& v = es.eigenvectors();
  out.cov = v * inv.asDiagonal() * v.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

InferenceReport covariances(const Panel& panel, const FitResult& fit, LinkKind kind) {
  check_fit(panel, fit);
  const Index n = panel.n_units();
  const Index t_len = panel.n_periods();
  InferenceReport rep;
  rep.cov_alpha.resize(static_cast<std::size_t>(n));
  rep.cov_f.resize(static_cast<std::size_t>(t_len));
  std::vector<char> deg_i(static_cast<std::size_t>(n), 0);
  std::vector<char> deg_t(static_cast<std::size_t>(t_len), 0);
  rep.local_time.resize(n);
  parallel_for(n, [&](std::ptrdiff_t i) {
    BlockCovariance c = covariance_from_hessian(hessian_unit(panel, fit, i, kind));
    rep.cov_alpha[static_cast<std::size_t>(i)] = std::move(c.cov);
    deg_i[static_cast<std::size_t>(i)] = c.degenerate;
    rep.local_time(i) = local_time(fit, i, kind);
  });
  if (fit.params.n_factors() > 0) {
    parallel_for(t_len, [&](std::ptrdiff_t t) {
      BlockCovariance c = covariance_from_hessian(hessian_period(panel, fit, t, kind));
      rep.cov_f[static_cast<std::size_t>(t)] = std::move(c.cov);
      deg_t[static_cast<std::size_t>(t)] = c.degenerate;
    });
  } else {
    for (auto& c : rep.cov_f) c.resize(0, 0);
  }
  for (Index i = 0; i < n; ++i)
    if (deg_i[static_cast<std::size_t>(i)]) rep.degenerate_units.push_back(i);
  for (Index t = 0; t < t_len; ++t)
    if (deg_t[static_cast<std::size_t>(t)]) rep.degenerate_periods.push_back(t);
  const double ss = squared_residuals(panel, fit, kind);
  rep.mse = ss / (static_cast<double>(n) * std::sqrt(static_cast<double>(t_len)));
  rep.mse_nt = ss / (static_cast<double>(n) * static_cast<double>(t_len));
  return rep;
}

ProbInterval prob_interval(const Panel& panel, const FitResult& fit, const InferenceReport& report, Index i,
                           Index t, double level, LinkKind kind) {
  check_fit(panel, fit);
  if (i < 0 || i >= panel.n_units() || t < 0 || t >= panel.n_periods())
    throw std::out_of_range("cell index out of range");
  const double q = two_sided_quantile(level);
  ProbInterval out;
  out.estimate = link_probability(fit.zhat(i, t), kind);
  const bool deg = std::binary_search(report.degenerate_units.begin(), report.degenerate_units.end(), i) ||
                   std::binary_search(report.degenerate_periods.begin(), report.degenerate_periods.end(), t);
  if (deg) {
    out.degenerate = true;
    return out;
  }
  const Index nq = panel.n_covariates();
  const Index r = fit.params.n_factors();
  Eigen::VectorXd g(nq + r);
  g.head(nq) = panel.x(i, t).transpose();
  g.tail(r) = fit.params.f.row(t).transpose();
  double var = g.dot(report.cov_alpha[static_cast<std::size_t>(i)] * g);
  if (r > 0) {
    const Eigen::VectorXd lam = fit.params.lambda.row(i).transpose();
    var += lam.dot(report.cov_f[static_cast<std::size_t>(t)] * lam);
  }
  const double sd = link_density(fit.zhat(i, t), kind) * std::sqrt(std::max(var, 0.0));
  out.lower = std::clamp(out.estimate - q * sd, 0.0, 1.0);
  out.upper = std::clamp(out.estimate + q * sd, 0.0, 1.0);
  return out;
}

ValueInterval common_component_interval(const Panel& panel, const FitResult& fit, const InferenceReport& report,
                                        Index i, Index t, double level) {
  check_fit(panel, fit);
  if (i < 0 || i >= panel.n_units() || t < 0 || t >= panel.n_periods())
    throw std::out_of_range("cell index out of range");
  const Index r = fit.params.n_factors();
  const double zq = two_sided_quantile(level);
  ValueInterval out;
  if (r == 0) return out;
  const Eigen::VectorXd lam = fit.params.lambda.row(i).transpose();
  const Eigen::VectorXd f = fit.params.f.row(t).transpose();
  const Eigen::MatrixXd cov_lam = report.cov_alpha[static_cast<std::size_t>(i)].bottomRightCorner(r, r);
  const double var = f.dot(cov_lam * f) + lam.dot(report.cov_f[static_cast<std::size_t>(t)] * lam);
  out.estimate = lam.dot(f);
  out.sd = std::sqrt(std::max(var, 0.0));
  out.lower = out.estimate - zq * out.sd;
  out.upper = out.estimate + zq * out.sd;
  return out;
}

double local_time(const Eigen::Ref<const Eigen::VectorXd>& z_path, double alpha_norm, LinkKind kind) {
  if (z_path.size() == 0) throw std::invalid_argument("empty index path");
  double s = 0.0;
  for (Index t = 0; t < z_path.size(); ++t) s += link_density(z_path(t), kind);
  return std::fabs(alpha_norm) * s / std::sqrt(static_cast<double>(z_path.size()));
}

double local_time(const FitResult& fit, Index i, LinkKind kind) {
  if (i < 0 || i >= fit.zhat.rows()) throw std::out_of_range("unit index out of range");
  const double norm = std::sqrt(fit.params.b.row(i).squaredNorm() + fit.params.lambda.row(i).squaredNorm());
  return local_time(fit.zhat.row(i).transpose(), norm, kind);
}

double mse(const Panel& panel, const FitResult& fit, LinkKind kind) {
  return squared_residuals(panel, fit, kind) /
         (static_cast<double>(panel.n_units()) * std::sqrt(static_cast<double>(panel.n_periods())));
}

double mse_nt(const Panel& panel, const FitResult& fit, LinkKind kind) {
  return squared_residuals(panel, fit, kind) /
         (static_cast<double>(panel.n_units()) * static_cast<double>(panel.n_periods()));
}

}  // namespace nsbfm
