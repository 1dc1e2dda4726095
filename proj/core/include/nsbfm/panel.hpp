#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace nsbfm {

using Eigen::Index;

/// Binary outcomes y (N × T) with observed covariates. Covariates are stored
/// per unit as a T × q block so a unit's design rows are contiguous.
class Panel {
 public:
  Panel() = default;

  /// Validates: y entries exactly 0 or 1, N, T >= 1, all covariates finite,
  /// one T × q block per unit (an empty vector means q = 0).
  Panel(Eigen::MatrixXd y, std::vector<Eigen::MatrixXd> x);

  Index n_units() const noexcept { return y_.rows(); }
  Index n_periods() const noexcept { return y_.cols(); }
  Index n_covariates() const noexcept { return q_; }

  const Eigen::MatrixXd& y() const noexcept { return y_; }
  double y(Index i, Index t) const { return y_(i, t); }

  /// T × q covariates of unit i.
  const Eigen::MatrixXd& x(Index i) const { return x_[static_cast<std::size_t>(i)]; }
  auto x(Index i, Index t) const { return x_[static_cast<std::size_t>(i)].row(t); }

 private:
  Eigen::MatrixXd y_;
  std::vector<Eigen::MatrixXd> x_;
  Index q_ = 0;
};

/// Coefficients B (N × q), loadings Λ (N × r) and factor path F (T × r).
struct ModelParams {
  Eigen::MatrixXd b;
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd f;

  Index n_factors() const noexcept { return lambda.cols(); }

  /// Throws std::invalid_argument unless shapes match the panel and all
  /// entries are finite.
  void check_against(const Panel& panel) const;
};

/// Single index z_it = β_i'x_it + λ_i'f_t for every cell.
Eigen::MatrixXd single_index(const Panel& panel, const ModelParams& params);

/// Covariate part β_i'x_it for every cell.
Eigen::MatrixXd covariate_index(const Panel& panel, const Eigen::MatrixXd& b);

struct FitDiagnostics {
  std::vector<Index> degenerate_units;
  std::vector<Index> degenerate_periods;
  std::vector<Index> non_interior_units;
  std::vector<Index> non_interior_periods;
  int restarts = 1;
  int best_restart = 0;
};

struct FitResult {
  ModelParams params;
  Eigen::MatrixXd zhat;
  std::vector<double> loglik_trace;
  int n_iterations = 0;
  bool converged = false;
  Eigen::VectorXd sigma_hat;
  FitDiagnostics diagnostics;

  double final_loglik() const { return loglik_trace.empty() ? 0.0 : loglik_trace.back(); }
};

/// Outcome CSV: rows = units, columns = periods, cells in {0,1}, no header.
/// Covariate CSV (optional): header `unit,period,cov_1..cov_q`, one row per
/// (unit, period) with 0-based indices covering the full N × T grid.
Panel load_panel(const std::filesystem::path& outcome_path,
                 const std::optional<std::filesystem::path>& covariate_path = std::nullopt);

/// Writes the long-format covariate file read by load_panel.
void save_covariates(const Panel& panel, const std::filesystem::path& path);

/// Writes B.csv, Lambda.csv, F.csv, zhat.csv and trace.csv into dir,
/// creating it when needed.
void save_fit(const FitResult& fit, const std::filesystem::path& dir);

/// Reads the files written by save_fit. Fields not stored on disk
/// (diagnostics, convergence flag) are left at their defaults; sigma_hat is
/// recomputed from Λ.
FitResult load_fit(const std::filesystem::path& dir);

}  // namespace nsbfm
