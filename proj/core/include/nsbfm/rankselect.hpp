#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "nsbfm/linkfn.hpp"
#include "nsbfm/mle.hpp"
#include "nsbfm/panel.hpp"

namespace nsbfm {

/// Which threshold rule to apply: integrated single indices, or single indices
/// that are stationary through cointegration.
enum class Regime { Nonstationary, Cointegrated };

std::string_view to_string(Regime r);

/// Accepts "nonstat"/"nonstationary" and "coint"/"cointegrated".
Regime parse_regime(std::string_view name);

struct RankReport {
  Index k_fit = 0;
  Eigen::VectorXd sigma;  ///< diagonal of Λ̂'Λ̂/N, non-increasing
  double threshold = 0.0;
  Index r_hat = 0;
  Regime regime = Regime::Nonstationary;
  double c_nt = 0.0;  ///< min(√N, √T)
};

/// π = σ̂₁·(C²·T^{-1/2})^{-1/3} for integrated indices, σ̂₁·C^{-2/3} for
/// cointegrated ones, with C = min(√N, √T).
double rank_threshold(double sigma1, Index n_units, Index n_periods, Regime regime);

/// Number of entries strictly above the threshold.
Index count_above(const Eigen::VectorXd& sigma, double threshold);

/// Threshold and count for an existing overfitted fit.
RankReport rank_from_fit(const FitResult& fit, Index n_units, Index n_periods, Regime regime);

/// Fits k_max factors and counts normalized loading variances above the
/// threshold. cfg.n_factors is ignored.
RankReport select_rank(const Panel& panel, LinkKind kind, Index k_max, Regime regime, EstimationConfig cfg);

}  // namespace nsbfm
