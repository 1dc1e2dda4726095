#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nsbfm/linkfn.hpp"
#include "nsbfm/panel.hpp"

namespace nsbfm {

/// Nonstationary: integrated covariates and factors, integrated single index.
/// Cointegrated: β'x + λ'f collapses to a stationary combination of the
/// covariate noise.
enum class DgpCase { Nonstationary, Cointegrated };

std::string_view to_string(DgpCase c);

struct DgpSpec {
  DgpCase dgp_case = DgpCase::Nonstationary;
  Index n_units = 100;
  Index n_periods = 100;
  LinkKind link = LinkKind::Logit;
  std::uint64_t seed = 0;
  /// Replication index; selects an independent set of RNG streams.
  std::uint32_t replication = 0;

  static constexpr Index kCovariates = 4;
  static constexpr Index kFactors = 2;

  /// Throws std::invalid_argument unless N >= 1 and T >= 2.
  void validate() const;
};

struct SimulatedPanel {
  Panel panel;
  ModelParams truth;
  Eigen::MatrixXd z_true;  ///< N × T true indices
  /// Stationary AR(1) covariate noise e_it, per unit T × q.
  std::vector<Eigen::MatrixXd> noise;
};

SimulatedPanel simulate(const DgpSpec& spec);

/// y_it = 1{u_it < Ψ(z_it)} with u_it uniform from unit i's outcome stream.
Eigen::MatrixXd draw_outcomes(const Eigen::MatrixXd& z, LinkKind kind, std::uint64_t seed,
                              std::uint32_t replication = 0);

/// Pure random walk f_t = f_{t-1} + scale·N(0, I_r) started at f_0 = 0.
Eigen::MatrixXd simulate_factors(Index n_periods, Index n_factors, double innovation_scale, std::uint64_t seed,
                                 std::uint32_t replication = 0);

}  // namespace nsbfm
