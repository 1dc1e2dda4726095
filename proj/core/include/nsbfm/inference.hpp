#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nsbfm/linkfn.hpp"
#include "nsbfm/panel.hpp"

namespace nsbfm {

/// Blocks whose smallest eigenvalue falls below this fraction of the trace are
/// inverted with the Moore-Penrose pseudo-inverse and reported as degenerate.
inline constexpr double kDegenerateRatio = 1e-10;

struct InferenceReport {
  std::vector<Eigen::MatrixXd> cov_alpha;  ///< per unit, (q+r) × (q+r)
  std::vector<Eigen::MatrixXd> cov_f;      ///< per period, r × r
  Eigen::VectorXd local_time;              ///< per unit
  double mse = 0.0;                        ///< scaled by N√T
  double mse_nt = 0.0;                     ///< scaled by NT
  std::vector<Index> degenerate_units;
  std::vector<Index> degenerate_periods;
};

/// -Σ_t K(ẑ_it) ĝ_it ĝ_it' with ĝ_it = (x_it', f̂_t')'.
Eigen::MatrixXd hessian_unit(const Panel& panel, const FitResult& fit, Index i, LinkKind kind);

/// -Σ_i K(ẑ_it) λ̂_i λ̂_i'.
Eigen::MatrixXd hessian_period(const Panel& panel, const FitResult& fit, Index t, LinkKind kind);

struct BlockCovariance {
  Eigen::MatrixXd cov;
  bool degenerate = false;
};

/// (-H)^{-1}, or its pseudo-inverse when -H is numerically singular.
BlockCovariance covariance_from_hessian(const Eigen::MatrixXd& hessian);

/// Covariances for every unit and period, local times and both MSE scalings.
InferenceReport covariances(const Panel& panel, const FitResult& fit, LinkKind kind);

struct ProbInterval {
  double lower = 0.0;
  double upper = 1.0;
  double estimate = 0.5;
  /// Set when the unit or period covariance came from a pseudo-inverse; the
  /// interval is then the uninformative [0, 1].
  bool degenerate = false;
};

/// Delta-method interval for Ψ(z_it), clipped to [0, 1].
ProbInterval prob_interval(const Panel& panel, const FitResult& fit, const InferenceReport& report, Index i,
                           Index t, double level, LinkKind kind);

struct ValueInterval {
  double estimate = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Interval for the common component λ_i'f_t with variance
/// f̂_t' Cov(λ̂_i) f̂_t + λ̂_i' Cov(f̂_t) λ̂_i.
ValueInterval common_component_interval(const Panel& panel, const FitResult& fit, const InferenceReport& report,
                                        Index i, Index t, double level);

/// ‖α̂_i‖·T^{-1/2}·Σ_t Ψ'(ẑ_it).
double local_time(const FitResult& fit, Index i, LinkKind kind);

/// Same estimator on an arbitrary index path.
double local_time(const Eigen::Ref<const Eigen::VectorXd>& z_path, double alpha_norm, LinkKind kind);

/// Σ (y - Ψ(ẑ))² / (N√T).
double mse(const Panel& panel, const FitResult& fit, LinkKind kind);

/// Σ (y - Ψ(ẑ))² / (NT).
double mse_nt(const Panel& panel, const FitResult& fit, LinkKind kind);

}  // namespace nsbfm
