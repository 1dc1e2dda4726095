#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "nsbfm/linkfn.hpp"

using nsbfm::LinkKind;

namespace {

// Reference values computed with mpmath at 60 digits:
// z, log Φ(z), log(1 - Φ(z)), M(z), K(z).
struct ProbitRef {
  double z, log_cdf, log_ccdf, m, k;
};
constexpr ProbitRef kProbit[] = {
    {-37.0, -689.03058557689064, -5.725571222524577e-300, 37.026987686126994, 7.8497456477810114e-297},
    {-20.0, -203.91715537109727, -2.7536241186062337e-89, 20.049753068527849, 1.1069365136539651e-86},
    {-8.0, -35.013437159914552, -6.2209605742717858e-16, 8.1213681122361177, 4.1031353272209133e-14},
    {-6.5, -23.938149495161838, -4.0160005839397589e-11, 6.6473013614574468, 1.7745347319800837e-09},
    {-6.0, -20.736768949974707, -9.865876455243758e-10, 6.1584826106204815, 3.7418218874803923e-08},
    {-5.9, -20.125799580203175, -1.8175078647510959e-09, 6.0609166366511102, 6.6765625018253077e-08},
    {-2.0, -3.7831843336820321, -0.02301290932896349, 2.4284633955018307, 0.13111508586504231},
    {0.0, -0.69314718055994529, -0.69314718055994529, 1.5957691216057308, 0.63661977236758138},
    {1.0, -0.17275377902344988, -1.8410216450092636, 1.8127352471001597, 0.43862886110221394},
    {3.0, -0.0013508099647481938, -6.6077262215103492, 3.2875364939725622, 0.014569863390000543},
    {6.2, -2.8231580374417821e-10, -21.987994800286593, 6.3538203845971992, 1.139738075998461e-08},
    {12.0, -1.776482112077679e-33, -75.410673001568796, 12.082214175254284, 2.5933067996563474e-31},
    {37.0, -5.725571222524577e-300, -689.03058557689064, 37.026987686126994, 7.8497456477810114e-297},
};

// z, log Ψ(z), log(1 - Ψ(z)), Ψ'(z) for the logistic link, same source.
struct LogitRef {
  double z, log_cdf, log_ccdf, density;
};
constexpr LogitRef kLogit[] = {
    {-700.0, -700, -9.85967654375977e-305, 9.8596765437597708e-305},
    {-30.0, -30.000000000000092, -9.3576229688397368e-14, 9.3576229688384229e-14},
    {-1.0, -1.3132616875182228, -0.31326168751822281, 0.19661193324148185},
    {0.0, -0.69314718055994529, -0.69314718055994529, 0.25},
    {2.5, -0.078889734292549626, -2.5788897342925496, 0.070103716545108163},
    {40.0, -4.2483542552915889e-18, -40, 4.2483542552915889e-18},
    {700.0, -9.85967654375977e-305, -700, 9.8596765437597708e-305},
};

void expect_rel(double got, double want, double rel) {
  EXPECT_LE(std::fabs(got - want), rel * std::max(std::fabs(want), 1e-300)) << "got " << got << " want " << want;
}

// Tiny reference values are only resolved to absolute 1e-300 by the oracle.
void expect_close(double got, double want, double rel) {
  EXPECT_LE(std::fabs(got - want), rel * std::max(std::fabs(want), 1e-280)) << "got " << got << " want " << want;
}

}  // namespace

TEST(Linkfn, LogitAtZero) {
  const auto e = nsbfm::evaluate(0.0, LinkKind::Logit);
  EXPECT_DOUBLE_EQ(e.psi, 0.5);
  EXPECT_DOUBLE_EQ(e.k, 0.25);
  EXPECT_EQ(e.m, 1.0);
}

TEST(Linkfn, LogitMIsExactlyOne) {
  for (double z = -800.0; z <= 800.0; z += 3.7) EXPECT_EQ(nsbfm::evaluate(z, LinkKind::Logit).m, 1.0);
}

TEST(Linkfn, ProbitAtZero) {
  const auto e = nsbfm::evaluate(0.0, LinkKind::Probit);
  EXPECT_NEAR(e.m, 4.0 / std::sqrt(2.0 * M_PI), 1e-15);
  EXPECT_NEAR(e.m, 1.595769, 1e-6);
}

TEST(Linkfn, LogitFarLeftTail) {
  const auto e = nsbfm::evaluate(-700.0, LinkKind::Logit);
  EXPECT_TRUE(std::isfinite(e.loglik1));
  EXPECT_DOUBLE_EQ(e.loglik1, -700.0);
  EXPECT_DOUBLE_EQ(e.loglik0, -std::exp(-700.0));
}

TEST(Linkfn, LogitMatchesHighPrecision) {
  for (const auto& r : kLogit) {
    const auto e = nsbfm::evaluate(r.z, LinkKind::Logit);
    expect_close(e.loglik1, r.log_cdf, 1e-14);
    expect_close(e.loglik0, r.log_ccdf, 1e-14);
    expect_rel(e.psidot, r.density, 1e-13);
    expect_rel(e.k, r.density, 1e-13);
  }
}

TEST(Linkfn, ProbitMatchesHighPrecision) {
  for (const auto& r : kProbit) {
    SCOPED_TRACE(r.z);
    const auto e = nsbfm::evaluate(r.z, LinkKind::Probit);
    expect_close(e.loglik1, r.log_cdf, 1e-13);
    expect_close(e.loglik0, r.log_ccdf, 1e-13);
    expect_rel(e.m, r.m, 1e-13);
    expect_rel(e.k, r.k, 1e-12);
    expect_rel(std::exp(e.log_k), r.k, 1e-12);
  }
}

TEST(Linkfn, ProbitLeftTailAsymptotics) {
  // log Φ(z) ≈ -z²/2 - log(-z √(2π)) for z ≪ 0.
  for (double z : {-40.0, -100.0, -1000.0}) {
    const double approx = -0.5 * z * z - std::log(-z * std::sqrt(2.0 * M_PI));
    const double got = nsbfm::evaluate(z, LinkKind::Probit).loglik1;
    EXPECT_TRUE(std::isfinite(got));
    EXPECT_NEAR(got, approx, 1.5 / (z * z));
  }
}

TEST(Linkfn, MdotValues) {
  EXPECT_EQ(nsbfm::mdot(5.0, LinkKind::Logit), 0.0);
  EXPECT_NEAR(nsbfm::mdot(0.0, LinkKind::Probit), 0.0, 1e-15);
  // mpmath derivatives of φ/(Φ(1-Φ)).
  expect_rel(nsbfm::mdot(1.0, LinkKind::Probit), 0.4305886202062566, 1e-12);
  expect_rel(nsbfm::mdot(-3.0, LinkKind::Probit), -0.9161076016729911, 1e-12);
  expect_rel(nsbfm::mdot(7.0, LinkKind::Probit), 0.9817380882394348, 1e-12);
  expect_rel(nsbfm::mdot(-15.0, LinkKind::Probit), -0.9956698762424401, 1e-12);
}

TEST(Linkfn, MdotMatchesFiniteDifferences) {
  const double h = 1e-6;
  for (double z = -8.0; z <= 8.0; z += 0.125) {
    const double fd =
        (nsbfm::evaluate(z + h, LinkKind::Probit).m - nsbfm::evaluate(z - h, LinkKind::Probit).m) / (2 * h);
    const double an = nsbfm::mdot(z, LinkKind::Probit);
    EXPECT_LE(std::fabs(fd - an), 1e-6 * std::max(1.0, std::fabs(an))) << "z = " << z;
  }
}

TEST(Linkfn, KernelIdentitiesOnGrids) {
  // Checked in log space so the identities remain meaningful where K and Ψ'
  // are subnormal; 1e-10 relative in value is 1e-10 absolute in logs.
  const auto check = [](LinkKind kind, double lim, double step) {
    for (double z = -lim; z <= lim + 1e-12; z += step) {
      const auto e = nsbfm::evaluate(z, kind);
      const double log_pq = e.loglik1 + e.loglik0;
      EXPECT_NEAR(e.log_k, 2.0 * std::log(e.m) + log_pq, 1e-10) << "z = " << z;
      EXPECT_NEAR(e.log_psidot, std::log(e.m) + log_pq, 1e-10) << "z = " << z;
      EXPECT_GT(e.k, 0.0) << "z = " << z;
      if (std::fabs(z) < 30.0) {
        // Both links are symmetric, so 1 - Ψ(z) = Ψ(-z) without cancellation.
        const double pq = nsbfm::link_probability(z, kind) * nsbfm::link_probability(-z, kind);
        EXPECT_LE(std::fabs(e.k - e.m * e.m * pq), 1e-10 * e.k) << "z = " << z;
        EXPECT_LE(std::fabs(e.psidot - e.m * pq), 1e-10 * e.psidot) << "z = " << z;
      }
    }
  };
  check(LinkKind::Probit, 38.0, 0.25);
  check(LinkKind::Logit, 700.0, 0.25);
}

TEST(Linkfn, ProbabilityIsMonotone) {
  for (const auto kind : {LinkKind::Logit, LinkKind::Probit}) {
    double prev_log = -std::numeric_limits<double>::infinity();
    for (double z = -38.0; z <= 8.0; z += 0.01) {
      const double l = nsbfm::evaluate(z, kind).loglik1;
      EXPECT_GT(l, prev_log) << "z = " << z;
      prev_log = l;
    }
  }
}

TEST(Linkfn, ClampedProbability) {
  const auto e = nsbfm::evaluate(-50.0, LinkKind::Probit);
  EXPECT_EQ(e.psi, nsbfm::kProbFloor);
  EXPECT_EQ(nsbfm::evaluate(50.0, LinkKind::Logit).psi, 1.0 - nsbfm::kProbFloor);
}

TEST(Linkfn, ProbitLoglikFiniteDifferenceAt37) {
  // d/dz log Φ(z) = φ/Φ and d/dz log(1-Φ) = -φ/(1-Φ), which are the score
  // weights for y = 1 and y = 0.
  for (double z : {-37.0, 37.0}) {
    for (double y : {0.0, 1.0}) {
      const double h = 1e-5;
      const double fd = (nsbfm::cell_loglik(y, z + h, LinkKind::Probit) -
                         nsbfm::cell_loglik(y, z - h, LinkKind::Probit)) / (2 * h);
      const auto c = nsbfm::cell_terms(y, z, LinkKind::Probit);
      EXPECT_TRUE(std::isfinite(c.loglik));
      EXPECT_LE(std::fabs(fd - c.score_weight), 1e-6 * std::max(1.0, std::fabs(c.score_weight)))
          << "z = " << z << " y = " << y;
    }
  }
}

TEST(Linkfn, CellTermsAgreeWithEvaluate) {
  for (const auto kind : {LinkKind::Logit, LinkKind::Probit}) {
    for (double z = -9.0; z <= 9.0; z += 0.5) {
      const auto e = nsbfm::evaluate(z, kind);
      const double p = nsbfm::link_probability(z, kind);
      for (double y : {0.0, 1.0}) {
        const auto c = nsbfm::cell_terms(y, z, kind);
        EXPECT_NEAR(c.loglik, y * e.loglik1 + (1 - y) * e.loglik0, 1e-14);
        EXPECT_NEAR(c.score_weight, e.m * (y - p), 1e-12 * std::max(1.0, e.m));
        EXPECT_NEAR(c.fisher_weight, e.k, 1e-14);
      }
    }
  }
}

TEST(Linkfn, RejectsNonFinite) {
  EXPECT_THROW(nsbfm::evaluate(std::nan(""), LinkKind::Logit), std::domain_error);
  EXPECT_THROW(nsbfm::evaluate(INFINITY, LinkKind::Probit), std::domain_error);
  EXPECT_THROW(nsbfm::mdot(-INFINITY, LinkKind::Probit), std::domain_error);
}

TEST(Linkfn, ParseLink) {
  EXPECT_EQ(nsbfm::parse_link("logit"), LinkKind::Logit);
  EXPECT_EQ(nsbfm::parse_link("probit"), LinkKind::Probit);
  EXPECT_THROW(nsbfm::parse_link("cloglog"), std::invalid_argument);
  EXPECT_EQ(nsbfm::to_string(LinkKind::Probit), "probit");
}
