#include <cmath>

#include <gtest/gtest.h>

#include "nsbfm/dgp.hpp"
#include "nsbfm/rankselect.hpp"

using nsbfm::Index;
using nsbfm::Regime;

TEST(RankSelect, CountsStrictlyAbove) {
  const Eigen::Vector3d sigma(5, 4, 3);
  EXPECT_EQ(nsbfm::count_above(sigma, 10.0), 0);
  EXPECT_EQ(nsbfm::count_above(sigma, 3.5), 2);
  EXPECT_EQ(nsbfm::count_above(sigma, 3.0), 2);
  EXPECT_EQ(nsbfm::count_above(sigma, 0.0), 3);
}

TEST(RankSelect, CountIsMonotoneInThreshold) {
  const Eigen::VectorXd sigma = (Eigen::VectorXd(6) << 9, 7.5, 7.5, 2, 0.1, 0).finished();
  Index prev = sigma.size();
  for (double th = -1.0; th < 10.0; th += 0.05) {
    const Index c = nsbfm::count_above(sigma, th);
    EXPECT_LE(c, prev);
    EXPECT_GE(c, 0);
    prev = c;
  }
}

TEST(RankSelect, ThresholdFormulas) {
  // N = 400, T = 900: C = 20.
  EXPECT_NEAR(nsbfm::rank_threshold(2.0, 400, 900, Regime::Nonstationary),
              2.0 * std::pow(400.0 / 30.0, -1.0 / 3.0), 1e-14);
  EXPECT_NEAR(nsbfm::rank_threshold(2.0, 400, 900, Regime::Cointegrated), 2.0 * std::pow(20.0, -2.0 / 3.0), 1e-14);
  // N = T = 500.
  EXPECT_NEAR(nsbfm::rank_threshold(1.0, 500, 500, Regime::Nonstationary), std::pow(500.0 / std::sqrt(500.0), -1.0 / 3.0),
              1e-14);
  EXPECT_THROW(nsbfm::rank_threshold(1.0, 0, 5, Regime::Cointegrated), std::invalid_argument);
}

TEST(RankSelect, ParseRegime) {
  EXPECT_EQ(nsbfm::parse_regime("nonstat"), Regime::Nonstationary);
  EXPECT_EQ(nsbfm::parse_regime("cointegrated"), Regime::Cointegrated);
  EXPECT_EQ(nsbfm::to_string(Regime::Cointegrated), "coint");
  EXPECT_THROW(nsbfm::parse_regime("stationary"), std::invalid_argument);
}

TEST(RankSelect, ReportFromFit) {
  nsbfm::FitResult fit;
  fit.params.lambda = Eigen::MatrixXd::Zero(100, 3);
  fit.sigma_hat = Eigen::Vector3d(4.0, 1.0, 0.05);
  const auto rep = nsbfm::rank_from_fit(fit, 100, 100, Regime::Cointegrated);
  EXPECT_EQ(rep.k_fit, 3);
  EXPECT_DOUBLE_EQ(rep.c_nt, 10.0);
  EXPECT_NEAR(rep.threshold, 4.0 * std::pow(10.0, -2.0 / 3.0), 1e-14);
  EXPECT_EQ(rep.r_hat, 2);
}

TEST(RankSelect, SimulatedPanelInvariants) {
  nsbfm::DgpSpec spec;
  spec.dgp_case = nsbfm::DgpCase::Cointegrated;
  spec.n_units = 80;
  spec.n_periods = 80;
  spec.seed = 31;
  const auto sim = nsbfm::simulate(spec);
  const auto rep = nsbfm::select_rank(sim.panel, nsbfm::LinkKind::Logit, 4, Regime::Cointegrated, {});
  EXPECT_EQ(rep.k_fit, 4);
  ASSERT_EQ(rep.sigma.size(), 4);
  for (Index j = 1; j < 4; ++j) EXPECT_GE(rep.sigma(j - 1), rep.sigma(j));
  EXPECT_GE(rep.sigma.minCoeff(), 0.0);
  EXPECT_EQ(rep.r_hat, nsbfm::count_above(rep.sigma, rep.threshold));
  EXPECT_GE(rep.r_hat, 1);
  EXPECT_LE(rep.r_hat, 4);
  EXPECT_THROW(nsbfm::select_rank(sim.panel, nsbfm::LinkKind::Logit, 0, Regime::Cointegrated, {}),
               std::invalid_argument);
}
