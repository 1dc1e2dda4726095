#include "nsbfm/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/fisher_f.hpp>

#include "nsbfm/csv.hpp"
#include "nsbfm/error.hpp"
#include "nsbfm/linkfn.hpp"
#include "nsbfm/parallel.hpp"

namespace nsbfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct DfPoint {
  double tau;
  double p;
};

constexpr DfPoint kDfTable[] = {
#include "df_table.inc"
};

struct Ols {
  Eigen::VectorXd coef;
  Eigen::VectorXd resid;
  double r2 = 0.0;
};

// Least squares of y on [1, x].
Ols ols_with_intercept(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(y.size(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  Ols out;
  out.coef = design.colPivHouseholderQr().solve(y);
  out.resid = y - design * out.coef;
  const double sst = (y.array() - y.mean()).square().sum();
  const double ssr = out.resid.squaredNorm();
  out.r2 = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : (ssr == 0.0 ? 1.0 : 0.0);
  return out;
}

// Orthonormal basis of the centered column space.
Eigen::MatrixXd centered_basis(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd c = m.rowwise() - m.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index rank = 0;
  const double tol = s.size() > 0 ? 1e-10 * s(0) : 0.0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

bool parses_as_number(std::string_view field) {
  const std::string s(field);
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

// ---- jumps -----------------------------------------------------------------

JumpTest detect_jumps(std::span<const double> r, double level) {
  const std::size_t m = r.size();
  if (m < 3) throw std::invalid_argument("jump test needs at least 3 intraday returns, got " + std::to_string(m));
  if (!(level > 0.5 && level < 1.0)) throw std::invalid_argument("jump test level must lie in (0.5, 1)");
  double rv = 0.0;
  double sum2 = 0.0;
  double sum4 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::isfinite(r[j])) throw std::invalid_argument("non-finite intraday return at position " + std::to_string(j));
    rv += r[j] * r[j];
    if (j + 1 < m) {
      const double a = std::min(std::fabs(r[j]), std::fabs(r[j + 1]));
      sum2 += a * a;
      sum4 += a * a * a * a;
    }
  }
  const double md = static_cast<double>(m);
  const double pi = std::numbers::pi;
  JumpTest out;
  out.rv = rv;
  out.realized_vol = std::sqrt(rv);
  out.minrv = pi / (pi - 2.0) * (md / (md - 1.0)) * sum2;
  out.minrq = pi * md / (3.0 * pi - 8.0) * (md / (md - 1.0)) * sum4;
  if (rv == 0.0 || out.minrv == 0.0) {
    out.statistic = kNaN;
    return out;
  }
  out.active = true;
  const double quarticity_ratio = std::max(1.0, out.minrq / (out.minrv * out.minrv));
  out.statistic = (1.0 - out.minrv / rv) / std::sqrt(kMinRvTheta / md * quarticity_ratio);
  out.indicator = out.statistic > normal_quantile(level) ? 1 : 0;
  return out;
}

Panel JumpPanel::to_panel() const {
  const Index n = indicators.rows();
  const Index t = indicators.cols();
  std::vector<Eigen::MatrixXd> x(static_cast<std::size_t>(n), Eigen::MatrixXd(t, 1));
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd v = volatility.row(i).transpose();
    const double mean = v.mean();
    const double sd = t > 1 ? std::sqrt((v.array() - mean).square().sum() / static_cast<double>(t - 1)) : 0.0;
    x[static_cast<std::size_t>(i)].col(0) =
        sd > 0.0 ? Eigen::VectorXd((v.array() - mean) / sd) : Eigen::VectorXd::Zero(t);
  }
  return Panel(indicators, std::move(x));
}

JumpPanel build_jump_panel(const std::vector<std::vector<IntradayDay>>& days, double level) {
  if (days.empty()) throw std::invalid_argument("jump panel needs at least one asset");
  const std::size_t n = days.size();
  const std::size_t t = days.front().size();
  if (t == 0) throw std::invalid_argument("jump panel needs at least one day");
  JumpPanel jp;
  jp.indicators.resize(static_cast<Index>(n), static_cast<Index>(t));
  jp.stats.resize(static_cast<Index>(n), static_cast<Index>(t));
  jp.volatility.resize(static_cast<Index>(n), static_cast<Index>(t));
  for (const auto& d : days.front()) jp.dates.push_back(d.date);
  for (std::size_t i = 0; i < n; ++i) {
    jp.assets.push_back(days[i].empty() ? std::string() : days[i].front().asset);
    if (days[i].size() != t)
      throw std::invalid_argument("asset " + jp.assets.back() + " has " + std::to_string(days[i].size()) +
                                  " days, expected " + std::to_string(t));
    for (std::size_t s = 0; s < t; ++s)
      if (days[i][s].date != jp.dates[s])
        throw std::invalid_argument("asset " + jp.assets.back() + " day " + std::to_string(s + 1) + " is dated " +
                                    days[i][s].date + ", expected " + jp.dates[s]);
  }
  parallel_for(static_cast<std::ptrdiff_t>(n * t), [&](std::ptrdiff_t k) {
    const auto i = static_cast<std::size_t>(k) / t;
    const auto s = static_cast<std::size_t>(k) % t;
    const JumpTest jt = detect_jumps(days[i][s], level);
    const auto ii = static_cast<Index>(i);
    const auto ss = static_cast<Index>(s);
    jp.indicators(ii, ss) = jt.indicator;
    jp.stats(ii, ss) = jt.statistic;
    jp.volatility(ii, ss) = jt.realized_vol;
  });
  return jp;
}

JumpPanel load_jump_panel(const std::filesystem::path& dir, double level) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory", dir);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .csv files found", dir);
  std::vector<std::vector<IntradayDay>> days;
  for (const auto& path : files) {
    const auto lines = csv::read_lines(path);
    std::vector<IntradayDay> asset_days;
    for (std::size_t r = 0; r < lines.size(); ++r) {
      if (lines[r].empty()) continue;
      const auto fields = csv::split_fields(lines[r]);
      if (r == 0 && fields.size() >= 2 && !parses_as_number(fields[1])) continue;
      if (fields.size() < 4)
        throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " needs a date and at least 3 returns",
                         r + 1, fields.size() + 1);
      IntradayDay d;
      d.asset = path.stem().string();
      d.date = std::string(fields[0]);
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const double v = csv::parse_double(fields[c], r + 1, c + 1);
        if (!std::isfinite(v))
          throw ParseError(path.string() + ": non-finite return at row " + std::to_string(r + 1), r + 1, c + 1);
        d.returns.push_back(v);
      }
      asset_days.push_back(std::move(d));
    }
    days.push_back(std::move(asset_days));
  }
  try {
    return build_jump_panel(days, level);
  } catch (const std::invalid_argument& e) {
    throw ParseError(dir.string() + ": " + e.what());
  }
}

void save_jump_panel(const JumpPanel& jp, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory", dir);
  csv::write_matrix(dir / "indicators.csv", jp.indicators);
  csv::write_matrix(dir / "stats.csv", jp.stats);
  csv::write_matrix(dir / "volatility.csv", jp.volatility);
  save_covariates(jp.to_panel(), dir / "covariates.csv");
  std::vector<std::vector<std::string>> assets;
  for (const auto& a : jp.assets) assets.push_back({a});
  csv::write_table(dir / "assets.txt", {"asset"}, assets);
  std::vector<std::vector<std::string>> dates;
  for (const auto& d : jp.dates) dates.push_back({d});
  csv::write_table(dir / "dates.txt", {"date"}, dates);
}

// ---- ADF -------------------------------------------------------------------

int default_adf_lags(Index n_obs) {
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n_obs) / 100.0, 0.25)));
}

double adf_statistic(std::span<const double> y, int p) {
  const auto t = static_cast<Index>(y.size());
  if (p < 0) throw std::invalid_argument("ADF lag count must be non-negative");
  if (t <= p + 10)
    throw NumericalError("ADF regression needs more than " + std::to_string(p + 10) + " observations, got " +
                         std::to_string(t));
  Eigen::VectorXd dy(t - 1);
  for (Index k = 0; k + 1 < t; ++k) dy(k) = y[static_cast<std::size_t>(k + 1)] - y[static_cast<std::size_t>(k)];
  if (dy.cwiseAbs().maxCoeff() == 0.0) throw NumericalError("ADF regression on a constant series");
  const Index nobs = t - 1 - p;
  const Index cols = 2 + p;
  Eigen::MatrixXd x(nobs, cols);
  Eigen::VectorXd lhs(nobs);
  for (Index row = 0; row < nobs; ++row) {
    const Index k = row + p;  // index into dy
    lhs(row) = dy(k);
    x(row, 0) = 1.0;
    x(row, 1) = y[static_cast<std::size_t>(k)];
    for (Index j = 1; j <= p; ++j) x(row, 1 + j) = dy(k - j);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < cols) throw NumericalError("ADF regressors are collinear");
  const Eigen::VectorXd coef = qr.solve(lhs);
  const double ssr = (lhs - x * coef).squaredNorm();
  const double s2 = ssr / static_cast<double>(nobs - cols);
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd e1 = xtx.ldlt().solve(Eigen::VectorXd::Unit(cols, 1));
  const double se = std::sqrt(s2 * e1(1));
  if (!(se > 0.0)) return -std::numeric_limits<double>::infinity();
  return coef(1) / se;
}

double df_pvalue(double tau) {
  constexpr double lo = 0.001;
  constexpr double hi = 0.999;
  if (std::isnan(tau)) throw std::invalid_argument("Dickey-Fuller p-value of NaN");
  const auto* first = std::begin(kDfTable);
  const auto* last = std::end(kDfTable);
  double p;
  if (tau <= first->tau) {
    p = first->p;
  } else if (tau >= (last - 1)->tau) {
    p = (last - 1)->p;
  } else {
    const auto* it = std::upper_bound(first, last, tau, [](double v, const DfPoint& d) { return v < d.tau; });
    const DfPoint& a = *(it - 1);
    const DfPoint& b = *it;
    p = a.p + (b.p - a.p) * (tau - a.tau) / (b.tau - a.tau);
  }
  return std::clamp(p, lo, hi);
}

double adf_pvalue(std::span<const double> series, int n_lags) { return df_pvalue(adf_statistic(series, n_lags)); }

// ---- pricing ---------------------------------------------------------------

GrsResult grs_test(const Eigen::VectorXd& alphas, const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& factors) {
  const Index t = residuals.rows();
  const Index n = residuals.cols();
  const Index k = factors.cols();
  if (alphas.size() != n || factors.rows() != t) throw std::invalid_argument("GRS inputs have inconsistent shapes");
  GrsResult out;
  out.df1 = static_cast<int>(n);
  out.df2 = static_cast<int>(t - n - k);
  if (t <= n + k) {
    out.note = "T = " + std::to_string(t) + " does not exceed N + K = " + std::to_string(n + k) +
               "; use a smaller asset universe";
    return out;
  }
  if (alphas.cwiseAbs().maxCoeff() == 0.0) {
    out.computed = true;
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const Eigen::MatrixXd sigma = residuals.transpose() * residuals / static_cast<double>(t - k - 1);
  const Eigen::LLT<Eigen::MatrixXd> sigma_llt(sigma);
  if (sigma_llt.info() != Eigen::Success) {
    out.note = "residual covariance is singular";
    return out;
  }
  const double quad_alpha = alphas.dot(sigma_llt.solve(alphas));
  double quad_mu = 0.0;
  if (k > 0) {
    const Eigen::VectorXd mu = factors.colwise().mean().transpose();
    const Eigen::MatrixXd c = factors.rowwise() - mu.transpose();
    const Eigen::MatrixXd omega = c.transpose() * c / static_cast<double>(t - 1);
    const Eigen::LLT<Eigen::MatrixXd> omega_llt(omega);
    if (omega_llt.info() != Eigen::Success) {
      out.note = "factor covariance is singular";
      return out;
    }
    quad_mu = mu.dot(omega_llt.solve(mu));
  }
  out.computed = true;
  out.statistic = static_cast<double>(t - n - k) / static_cast<double>(n) * quad_alpha / (1.0 + quad_mu);
  const boost::math::fisher_f_distribution<double> dist(static_cast<double>(out.df1), static_cast<double>(out.df2));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

Eigen::VectorXd canonical_correlations(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) throw std::invalid_argument("canonical correlations need equal sample lengths");
  const Eigen::MatrixXd ux = centered_basis(x);
  const Eigen::MatrixXd uy = centered_basis(y);
  if (ux.cols() == 0 || uy.cols() == 0) return Eigen::VectorXd();
  const Eigen::MatrixXd cross = ux.transpose() * uy;
  Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(cross).singularValues();
  for (Index j = 0; j < s.size(); ++j) s(j) = std::clamp(s(j), 0.0, 1.0);
  return s;
}

PricingReport price(const Eigen::MatrixXd& excess, const Eigen::MatrixXd& ff5, const Eigen::MatrixXd& jump) {
  const Index n = excess.rows();
  const Index t = excess.cols();
  if (ff5.rows() != t || jump.rows() != t)
    throw std::invalid_argument("returns cover " + std::to_string(t) + " periods but factors cover " +
                                std::to_string(ff5.rows()) + " and " + std::to_string(jump.rows()));
  if (!excess.allFinite() || !ff5.allFinite() || !jump.allFinite())
    throw std::invalid_argument("pricing inputs contain non-finite values");
  Eigen::MatrixXd augmented(t, ff5.cols() + jump.cols());
  augmented << ff5, jump;

  PricingReport rep;
  rep.r2_base.resize(n);
  rep.r2_augmented.resize(n);
  rep.alpha_base.resize(n);
  rep.alpha_augmented.resize(n);
  Eigen::MatrixXd resid_base(t, n);
  Eigen::MatrixXd resid_aug(t, n);
  parallel_for(n, [&](std::ptrdiff_t i) {
    const Eigen::VectorXd r = excess.row(i).transpose();
    // Intercepts at rounding level of the returns count as exact zeros.
    const double zero_tol = 1e-10 * r.cwiseAbs().maxCoeff();
    const Ols base = ols_with_intercept(r, ff5);
    const Ols aug = ols_with_intercept(r, augmented);
    rep.r2_base(i) = base.r2;
    rep.r2_augmented(i) = aug.r2;
    rep.alpha_base(i) = std::fabs(base.coef(0)) <= zero_tol ? 0.0 : base.coef(0);
    rep.alpha_augmented(i) = std::fabs(aug.coef(0)) <= zero_tol ? 0.0 : aug.coef(0);
    resid_base.col(i) = base.resid;
    resid_aug.col(i) = aug.resid;
  });
  rep.grs_base = grs_test(rep.alpha_base, resid_base, ff5);
  rep.grs_augmented = grs_test(rep.alpha_augmented, resid_aug, augmented);
  rep.canonical_corr = canonical_correlations(jump, ff5);
  return rep;
}

Eigen::VectorXd explained_variation(const Eigen::MatrixXd& excess, const Eigen::MatrixXd& factors, Index window) {
  const Index n = excess.rows();
  const Index t = excess.cols();
  const Index k = factors.cols();
  if (factors.rows() != t) throw std::invalid_argument("factor and return sample lengths differ");
  if (window > t) throw std::invalid_argument("window exceeds the sample length");
  if (window < k + 2)
    throw std::invalid_argument("window must be at least K + 2 = " + std::to_string(k + 2) + " periods");
  const Index n_windows = t - window + 1;
  Eigen::VectorXd out(n_windows);
  parallel_for(n_windows, [&](std::ptrdiff_t s) {
    const Eigen::MatrixXd f = factors.middleRows(s, window);
    const Eigen::MatrixXd r = excess.middleCols(s, window);
    Eigen::MatrixXd betas(n, k);
    for (Index i = 0; i < n; ++i)
      betas.row(i) = ols_with_intercept(r.row(i).transpose(), f).coef.tail(k).transpose();
    Eigen::MatrixXd design(n, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = betas;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    double ssr = 0.0;
    double sst = 0.0;
    for (Index j = 0; j < window; ++j) {
      const Eigen::VectorXd rt = r.col(j);
      ssr += (rt - design * qr.solve(rt)).squaredNorm();
      sst += (rt.array() - rt.mean()).square().sum();
    }
    out(s) = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
  });
  return out;
}

void save_pricing_report(const PricingReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory", dir);
  std::vector<std::vector<std::string>> rows;
  for (Index i = 0; i < rep.r2_base.size(); ++i)
    rows.push_back({std::to_string(i), csv::format_double(rep.r2_base(i)), csv::format_double(rep.r2_augmented(i)),
                    csv::format_double(rep.r2_augmented(i) - rep.r2_base(i)), csv::format_double(rep.alpha_base(i)),
                    csv::format_double(rep.alpha_augmented(i))});
  csv::write_table(dir / "r2.csv", {"asset", "r2_base", "r2_augmented", "delta_r2", "alpha_base", "alpha_augmented"},
                   rows);
  const auto grs_row = [](const std::string& model, const GrsResult& g) {
    return std::vector<std::string>{model, g.computed ? "1" : "0", csv::format_double(g.statistic),
                                    csv::format_double(g.p_value), std::to_string(g.df1), std::to_string(g.df2),
                                    g.note};
  };
  csv::write_table(dir / "grs.csv", {"model", "computed", "statistic", "p_value", "df1", "df2", "note"},
                   {grs_row("base", rep.grs_base), grs_row("augmented", rep.grs_augmented)});
  std::vector<std::vector<std::string>> cc;
  for (Index j = 0; j < rep.canonical_corr.size(); ++j)
    cc.push_back({std::to_string(j + 1), csv::format_double(rep.canonical_corr(j))});
  csv::write_table(dir / "canonical_correlations.csv", {"index", "correlation"}, cc);
}

}  // namespace nsbfm
