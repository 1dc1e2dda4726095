#include "nsbfm/linkfn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace nsbfm {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Mills ratio (1 - Φ(x)) / φ(x) for x >= kProbitTailCrossover, by the Laplace
// continued fraction 1/(x + 1/(x + 2/(x + 3/(x + ...)))). 32 terms reach full
// double precision for x >= 6.
double mills_ratio(double x) noexcept {
  double t = x;
  for (int k = 32; k >= 1; --k) t = x + k / t;
  return 1.0 / t;
}

// Everything the probit kernels need, computed without forming products of
// tiny probabilities.
struct ProbitParts {
  double phi;        // φ(z)
  double log_phi;
  double cdf;        // Φ(z)
  double ccdf;       // 1 - Φ(z)
  double log_cdf;
  double log_ccdf;
  double hazard_lo;  // φ/Φ
  double hazard_hi;  // φ/(1-Φ)
};

ProbitParts probit_parts(double z) noexcept {
  ProbitParts p{};
  p.log_phi = -0.5 * z * z - kLogSqrt2Pi;
  p.phi = std::exp(p.log_phi);
  if (z < -kProbitTailCrossover) {
    const double r = mills_ratio(-z);
    p.cdf = p.phi * r;
    p.ccdf = 1.0 - p.cdf;
    p.log_cdf = p.log_phi + std::log(r);
    p.log_ccdf = std::log1p(-p.cdf);
    p.hazard_lo = 1.0 / r;
    p.hazard_hi = p.phi / p.ccdf;
  } else if (z > kProbitTailCrossover) {
    const double r = mills_ratio(z);
    p.ccdf = p.phi * r;
    p.cdf = 1.0 - p.ccdf;
    p.log_ccdf = p.log_phi + std::log(r);
    p.log_cdf = std::log1p(-p.ccdf);
    p.hazard_hi = 1.0 / r;
    p.hazard_lo = p.phi / p.cdf;
  } else {
    p.cdf = 0.5 * std::erfc(-z * kInvSqrt2);
    p.ccdf = 0.5 * std::erfc(z * kInvSqrt2);
    // Take the log of whichever side is near 1 through log1p of the other.
    p.log_cdf = p.cdf < 0.5 ? std::log(p.cdf) : std::log1p(-p.ccdf);
    p.log_ccdf = p.ccdf < 0.5 ? std::log(p.ccdf) : std::log1p(-p.cdf);
    p.hazard_lo = p.phi / p.cdf;
    p.hazard_hi = p.phi / p.ccdf;
  }
  return p;
}

struct LogitParts {
  double cdf;
  double ccdf;
  double log_cdf;
  double log_ccdf;
  double density;
  double log_density;
};

LogitParts logit_parts(double z) noexcept {
  const double a = std::fabs(z);
  const double e = std::exp(-a);
  const double l1p = std::log1p(e);
  const double big = 1.0 / (1.0 + e);
  const double small = e / (1.0 + e);
  LogitParts p{};
  p.density = small * big;
  p.log_density = -a - 2.0 * l1p;
  if (z >= 0.0) {
    p.cdf = big;
    p.ccdf = small;
    p.log_cdf = -l1p;
    p.log_ccdf = -a - l1p;
  } else {
    p.cdf = small;
    p.ccdf = big;
    p.log_cdf = -a - l1p;
    p.log_ccdf = -l1p;
  }
  return p;
}

void require_finite(double z) {
  if (!std::isfinite(z)) {
    throw std::domain_error("link evaluation at non-finite index " + std::to_string(z));
  }
}

}  // namespace

std::string_view to_string(LinkKind kind) {
  return kind == LinkKind::Logit ? "logit" : "probit";
}

LinkKind parse_link(std::string_view name) {
  if (name == "logit") return LinkKind::Logit;
  if (name == "probit") return LinkKind::Probit;
  throw std::invalid_argument("unknown link '" + std::string(name) + "' (expected logit or probit)");
}

LinkEval evaluate(double z, LinkKind kind) {
  require_finite(z);
  LinkEval out;
  if (kind == LinkKind::Logit) {
    const LogitParts p = logit_parts(z);
    out.psi = std::clamp(p.cdf, kProbFloor, 1.0 - kProbFloor);
    out.psidot = p.density;
    out.m = 1.0;
    out.k = p.density;
    out.mdot = 0.0;
    out.loglik0 = p.log_ccdf;
    out.loglik1 = p.log_cdf;
    out.log_psidot = p.log_density;
    out.log_k = p.log_density;
    return out;
  }
  const ProbitParts p = probit_parts(z);
  out.psi = std::clamp(p.cdf, kProbFloor, 1.0 - kProbFloor);
  out.psidot = p.phi;
  // Divide by the larger of Φ, 1-Φ so that M never involves a subnormal.
  out.m = z > 0.0 ? p.hazard_hi / p.cdf : p.hazard_lo / p.ccdf;
  out.mdot = -z * out.m - out.m * out.m * (p.ccdf - p.cdf);
  out.loglik0 = p.log_ccdf;
  out.loglik1 = p.log_cdf;
  out.log_psidot = p.log_phi;
  out.log_k = 2.0 * p.log_phi - p.log_cdf - p.log_ccdf;
  out.k = std::fabs(z) > kProbitTailCrossover ? std::exp(out.log_k) : p.hazard_lo * p.hazard_hi;
  return out;
}

double mdot(double z, LinkKind kind) {
  require_finite(z);
  if (kind == LinkKind::Logit) return 0.0;
  return evaluate(z, kind).mdot;
}

CellTerms cell_terms(double y, double z, LinkKind kind) noexcept {
  if (kind == LinkKind::Logit) {
    const LogitParts p = logit_parts(z);
    return {y * p.log_cdf + (1.0 - y) * p.log_ccdf,
            y * p.ccdf - (1.0 - y) * p.cdf,
            p.density};
  }
  const ProbitParts p = probit_parts(z);
  // M(y - Ψ) = y φ/Φ - (1-y) φ/(1-Φ)
  return {y * p.log_cdf + (1.0 - y) * p.log_ccdf,
          y * p.hazard_lo - (1.0 - y) * p.hazard_hi,
          p.hazard_lo * p.hazard_hi};
}

double cell_loglik(double y, double z, LinkKind kind) noexcept {
  if (kind == LinkKind::Logit) {
    const LogitParts p = logit_parts(z);
    return y * p.log_cdf + (1.0 - y) * p.log_ccdf;
  }
  const ProbitParts p = probit_parts(z);
  return y * p.log_cdf + (1.0 - y) * p.log_ccdf;
}

double link_probability(double z, LinkKind kind) noexcept {
  return kind == LinkKind::Logit ? logit_parts(z).cdf : probit_parts(z).cdf;
}

double link_density(double z, LinkKind kind) noexcept {
  return kind == LinkKind::Logit ? logit_parts(z).density : probit_parts(z).phi;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal quantile needs p in (0,1), got " + std::to_string(p));
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace nsbfm
