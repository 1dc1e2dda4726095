#include "nsbfm/rankselect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nsbfm {

std::string_view to_string(Regime r) { return r == Regime::Nonstationary ? "nonstat" : "coint"; }

Regime parse_regime(std::string_view name) {
  if (name == "nonstat" || name == "nonstationary") return Regime::Nonstationary;
  if (name == "coint" || name == "cointegrated") return Regime::Cointegrated;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "' (expected nonstat or coint)");
}

double rank_threshold(double sigma1, Index n_units, Index n_periods, Regime regime) {
  if (n_units < 1 || n_periods < 1) throw std::invalid_argument("panel dimensions must be positive");
  const double c = std::min(std::sqrt(static_cast<double>(n_units)), std::sqrt(static_cast<double>(n_periods)));
  if (regime == Regime::Cointegrated) return sigma1 * std::pow(c, -2.0 / 3.0);
  return sigma1 * std::pow(c * c / std::sqrt(static_cast<double>(n_periods)), -1.0 / 3.0);
}

Index count_above(const Eigen::VectorXd& sigma, double threshold) {
  return static_cast<Index>((sigma.array() > threshold).count());
}

RankReport rank_from_fit(const FitResult& fit, Index n_units, Index n_periods, Regime regime) {
  RankReport rep;
  rep.k_fit = fit.params.n_factors();
  rep.sigma = fit.sigma_hat;
  rep.regime = regime;
  rep.c_nt = std::min(std::sqrt(static_cast<double>(n_units)), std::sqrt(static_cast<double>(n_periods)));
  const double s1 = rep.sigma.size() > 0 ? rep.sigma(0) : 0.0;
  rep.threshold = rank_threshold(s1, n_units, n_periods, regime);
  rep.r_hat = count_above(rep.sigma, rep.threshold);
  return rep;
}

RankReport select_rank(const Panel& panel, LinkKind kind, Index k_max, Regime regime, EstimationConfig cfg) {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  cfg.n_factors = k_max;
  const FitResult f = fit(panel, kind, cfg);
  return rank_from_fit(f, panel.n_units(), panel.n_periods(), regime);
}

}  // namespace nsbfm
