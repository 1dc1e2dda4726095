#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "nsbfm/linkfn.hpp"
#include "nsbfm/panel.hpp"

namespace nsbfm {

struct EstimationConfig {
  Index n_factors = 1;
  /// Outer stopping rule: |L_new - L_last| <= tolerance · N · T.
  double tolerance = 1e-8;
  int max_outer_iterations = 500;
  int max_inner_newton_steps = 50;
  /// Initial ridge, relative to trace/dim of the block Fisher matrix.
  double ridge_floor = 1e-8;
  int n_restarts = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Σ_i Σ_t [y log Ψ(z) + (1-y) log(1-Ψ(z))], accumulated unit by unit.
double loglik(const Panel& panel, const ModelParams& params, LinkKind kind);

/// Result of one block of damped Fisher scoring.
struct BlockUpdate {
  Eigen::VectorXd value;
  double objective = 0.0;   ///< block log-likelihood at `value`
  double start_objective = 0.0;
  int steps = 0;
  bool converged = false;
  /// Fisher matrix could not be factored even at the largest ridge.
  bool degenerate = false;
  /// Step cap reached without convergence: no finite maximiser in sight,
  /// typically a separated block pressing against the index bound.
  bool non_interior = false;
};

/// Maximises Σ_j l(y_j, offset_j + w_j'θ) over θ from `start`, where w_j is
/// column j of `design_t` (p × n). Each step solves
/// (Σ K w w' + ridge·I) d = Σ M (y - Ψ) w and halves d until the objective
/// does not decrease, so the returned objective is never below the start.
/// Iterates never leave |z| <= 50 (logit) or 30 (probit), or the start's own
/// max |z| if that is larger. Stops once the step is below 1e-9·(1 + |θ|∞)
/// in max norm.
BlockUpdate solve_block(const Eigen::Ref<const Eigen::MatrixXd>& design_t,
                        const Eigen::Ref<const Eigen::VectorXd>& offset,
                        const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& start,
                        LinkKind kind, const EstimationConfig& cfg);

/// Re-optimises f_t holding B and Λ fixed.
BlockUpdate update_factor(const Panel& panel, const ModelParams& params, Index t, LinkKind kind,
                          const EstimationConfig& cfg);

/// Re-optimises α_i = (β_i', λ_i')' holding F fixed.
BlockUpdate update_unit(const Panel& panel, const ModelParams& params, Index i, LinkKind kind,
                        const EstimationConfig& cfg);

struct NormalizedFactors {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd f;
};

/// Rotates (Λ*, F*) so that F'F/T² = I and Λ'Λ/N is diagonal with
/// non-increasing entries, leaving ΛF' unchanged. Each column is signed so
/// that its largest-magnitude loading is positive. Throws NumericalError when
/// F* is rank deficient.
NormalizedFactors normalize(const Eigen::MatrixXd& lambda_star, const Eigen::MatrixXd& f_star);

/// Deterministic warm start: top-r singular factors of the rescaled ±1
/// outcome matrix, and per-unit one-covariate-at-a-time score steps for B.
ModelParams spectral_start(const Panel& panel, LinkKind kind, Index n_factors);

/// Alternating maximisation from a given start (one run, no restarts),
/// followed by normalization.
FitResult fit_from(const Panel& panel, LinkKind kind, const EstimationConfig& cfg, ModelParams start);

/// Full estimator: spectral start plus (n_restarts - 1) perturbed starts;
/// the run with the highest final log-likelihood is returned.
FitResult fit(const Panel& panel, LinkKind kind, const EstimationConfig& cfg);

}  // namespace nsbfm
