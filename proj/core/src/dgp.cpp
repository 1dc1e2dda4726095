#include "nsbfm/dgp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nsbfm/parallel.hpp"
#include "nsbfm/rng.hpp"

namespace nsbfm {

namespace {

// RNG stream ids. Per-unit streams are offset by the unit index.
constexpr std::uint32_t kStreamFactors = 1;
constexpr std::uint32_t kStreamBeta = 2;
constexpr std::uint32_t kStreamLambda = 3;
constexpr std::uint32_t kStreamNoiseBase = 1u << 20;
constexpr std::uint32_t kStreamOutcomeBase = 2u << 20;

constexpr double kFactorScale = 0.01;
constexpr double kNoiseAr = 0.1;

}  // namespace

std::string_view to_string(DgpCase c) {
  return c == DgpCase::Nonstationary ? "nonstationary" : "cointegrated";
}

void DgpSpec::validate() const {
  if (n_units < 1) throw std::invalid_argument("DGP needs N >= 1, got " + std::to_string(n_units));
  if (n_periods < 2) throw std::invalid_argument("DGP needs T >= 2, got " + std::to_string(n_periods));
}

Eigen::MatrixXd simulate_factors(Index n_periods, Index n_factors, double innovation_scale, std::uint64_t seed,
                                 std::uint32_t replication) {
  if (n_periods < 1 || n_factors < 1) throw std::invalid_argument("factor path needs T >= 1 and r >= 1");
  if (!(innovation_scale > 0.0)) throw std::invalid_argument("innovation scale must be positive");
  CounterRng rng(seed, replication, kStreamFactors);
  Eigen::MatrixXd f(n_periods, n_factors);
  Eigen::RowVectorXd level = Eigen::RowVectorXd::Zero(n_factors);
  for (Index t = 0; t < n_periods; ++t) {
    for (Index j = 0; j < n_factors; ++j) level(j) += innovation_scale * rng.normal();
    f.row(t) = level;
  }
  return f;
}

Eigen::MatrixXd draw_outcomes(const Eigen::MatrixXd& z, LinkKind kind, std::uint64_t seed,
                              std::uint32_t replication) {
  Eigen::MatrixXd y(z.rows(), z.cols());
  parallel_for(z.rows(), [&](std::ptrdiff_t i) {
    CounterRng rng(seed, replication, kStreamOutcomeBase + static_cast<std::uint32_t>(i));
    for (Index t = 0; t < z.cols(); ++t) y(i, t) = rng.uniform() < link_probability(z(i, t), kind) ? 1.0 : 0.0;
  });
  return y;
}

SimulatedPanel simulate(const DgpSpec& spec) {
  spec.validate();
  const Index n = spec.n_units;
  const Index t_len = spec.n_periods;
  constexpr Index q = DgpSpec::kCovariates;
  constexpr Index r = DgpSpec::kFactors;
  const bool coint = spec.dgp_case == DgpCase::Cointegrated;

  ModelParams truth;
  truth.f = simulate_factors(t_len, r, kFactorScale, spec.seed, spec.replication);

  truth.b.resize(n, q);
  if (coint) {
    truth.b.rowwise() = Eigen::RowVector4d(1.0, 0.5, 0.5, 1.0);
  } else {
    CounterRng rng(spec.seed, spec.replication, kStreamBeta);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < q; ++k) truth.b(i, k) = rng.uniform();
  }

  truth.lambda.resize(n, r);
  {
    CounterRng rng(spec.seed, spec.replication, kStreamLambda);
    const double sd1 = std::sqrt(2.0);
    for (Index i = 0; i < n; ++i) {
      truth.lambda(i, 0) = sd1 * rng.normal();
      truth.lambda(i, 1) = rng.normal();
    }
  }

  const double innovation = coint ? 1.0 : 0.1;
  std::vector<Eigen::MatrixXd> x(static_cast<std::size_t>(n));
  std::vector<Eigen::MatrixXd> noise(static_cast<std::size_t>(n));
  Eigen::MatrixXd z(n, t_len);

  parallel_for(n, [&](std::ptrdiff_t i) {
    const auto ui = static_cast<std::size_t>(i);
    CounterRng noise_rng(spec.seed, spec.replication, kStreamNoiseBase + static_cast<std::uint32_t>(i));
    Eigen::MatrixXd& xi = x[ui];
    Eigen::MatrixXd& ei = noise[ui];
    xi.resize(t_len, q);
    ei.resize(t_len, q);
    Eigen::RowVector4d e_prev = Eigen::RowVector4d::Zero();
    Eigen::RowVector4d x_prev = Eigen::RowVector4d::Zero();
    const double l1 = truth.lambda(i, 0);
    const double l2 = truth.lambda(i, 1);
    for (Index t = 0; t < t_len; ++t) {
      Eigen::RowVector4d e;
      for (Index k = 0; k < q; ++k) e(k) = kNoiseAr * e_prev(k) + innovation * noise_rng.normal();
      ei.row(t) = e;
      e_prev = e;
      if (coint) {
        const double a = l1 * truth.f(t, 0);
        const double b = l2 * truth.f(t, 1);
        xi.row(t) = Eigen::RowVector4d(-0.5 * a - 0.25 * b, -0.5 * a, -0.5 * b, -0.25 * a - 0.5 * b) + e;
      } else {
        x_prev += e;
        xi.row(t) = x_prev;
      }
      z(i, t) = xi.row(t).dot(truth.b.row(i)) + truth.lambda.row(i).dot(truth.f.row(t));
    }
  });
  Eigen::MatrixXd y = draw_outcomes(z, spec.link, spec.seed, spec.replication);

  SimulatedPanel out{Panel(std::move(y), std::move(x)), std::move(truth), std::move(z), std::move(noise)};
  return out;
}

}  // namespace nsbfm
