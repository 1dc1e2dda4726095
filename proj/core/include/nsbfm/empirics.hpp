#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbfm/panel.hpp"

namespace nsbfm {

// ---- jump detection --------------------------------------------------------

/// Asymptotic variance constant of MinRV relative to integrated quarticity.
inline constexpr double kMinRvTheta = 1.81;

struct IntradayDay {
  std::vector<double> returns;
  std::string asset;
  std::string date;
};

struct JumpTest {
  /// False when RV or MinRV is zero; statistic is then NaN and indicator 0.
  bool active = false;
  int indicator = 0;
  double statistic = 0.0;
  double realized_vol = 0.0;  ///< sqrt(RV)
  double rv = 0.0;
  double minrv = 0.0;
  double minrq = 0.0;
};

/// MinRV ratio jump test on one day of intraday log-returns. Rejects when the
/// statistic exceeds the standard normal quantile at `level`.
JumpTest detect_jumps(std::span<const double> returns, double level = 0.95);
inline JumpTest detect_jumps(const IntradayDay& day, double level = 0.95) {
  return detect_jumps(std::span<const double>(day.returns), level);
}

struct JumpPanel {
  Eigen::MatrixXd indicators;  ///< N × T, 0/1
  Eigen::MatrixXd stats;       ///< N × T, NaN for inactive days
  Eigen::MatrixXd volatility;  ///< N × T daily sqrt(RV)
  std::vector<std::string> assets;
  std::vector<std::string> dates;

  /// Binary panel with the per-asset standardized volatility as its single
  /// covariate.
  Panel to_panel() const;
};

/// days[i] holds asset i's days; every asset must cover the same dates in the
/// same order.
JumpPanel build_jump_panel(const std::vector<std::vector<IntradayDay>>& days, double level = 0.95);

/// One CSV per asset in `dir` (asset id = file stem, files taken in name
/// order). Each row is `date,r_1,...,r_M`; a header row is skipped when its
/// second field is not numeric.
JumpPanel load_jump_panel(const std::filesystem::path& dir, double level = 0.95);

/// Writes indicators.csv (readable as an outcome file), stats.csv,
/// volatility.csv, covariates.csv, assets.txt and dates.txt.
void save_jump_panel(const JumpPanel& jp, const std::filesystem::path& dir);

// ---- unit-root diagnostics --------------------------------------------------

/// floor(12 (T/100)^{1/4})
int default_adf_lags(Index n_obs);

/// t-statistic on y_{t-1} in Δy_t = a + ρ y_{t-1} + Σ_{j<=p} c_j Δy_{t-j} + e_t.
double adf_statistic(std::span<const double> series, int n_lags);

/// Asymptotic constant-case Dickey-Fuller p-value of a t-statistic,
/// interpolated from a table and clamped to [0.001, 0.999].
double df_pvalue(double tau);

double adf_pvalue(std::span<const double> series, int n_lags);

// ---- asset pricing ----------------------------------------------------------

struct GrsResult {
  bool computed = false;
  std::string note;  ///< why the test was skipped
  double statistic = 0.0;
  double p_value = 1.0;
  int df1 = 0;
  int df2 = 0;
};

/// Gibbons-Ross-Shanken test. alphas: N intercepts; residuals: T × N;
/// factors: T × K.
GrsResult grs_test(const Eigen::VectorXd& alphas, const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& factors);

/// Canonical correlations between the columns of x (T × a) and y (T × b),
/// non-increasing, min(rank x, rank y) values.
Eigen::VectorXd canonical_correlations(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct PricingReport {
  Eigen::VectorXd r2_base;
  Eigen::VectorXd r2_augmented;
  Eigen::VectorXd alpha_base;
  Eigen::VectorXd alpha_augmented;
  GrsResult grs_base;
  GrsResult grs_augmented;
  Eigen::VectorXd canonical_corr;
};

/// excess_returns: N × T; ff5: T × 5; jump_factors: T × r. Per-asset OLS on
/// (1, ff5) and (1, ff5, jump factors).
PricingReport price(const Eigen::MatrixXd& excess_returns, const Eigen::MatrixXd& ff5,
                    const Eigen::MatrixXd& jump_factors);

/// Rolling share of return variation explained by the factors: betas from
/// time-series regressions in the window, then a cross-sectional fit of
/// returns on (1, betas) each period. Length T - window + 1.
Eigen::VectorXd explained_variation(const Eigen::MatrixXd& excess_returns, const Eigen::MatrixXd& factors,
                                    Index window);

void save_pricing_report(const PricingReport& report, const std::filesystem::path& dir);

}  // namespace nsbfm
