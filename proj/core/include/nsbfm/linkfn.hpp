#pragma once

#include <string_view>

namespace nsbfm {

enum class LinkKind { Logit, Probit };

std::string_view to_string(LinkKind kind);

/// Parses "logit" or "probit"; throws std::invalid_argument otherwise.
LinkKind parse_link(std::string_view name);

/// Floor used when the link probability is reported as a bounded value.
inline constexpr double kProbFloor = 1e-15;

/// Beyond this |z| the probit tails are evaluated through the Mills ratio.
inline constexpr double kProbitTailCrossover = 6.0;

/// Link value, score kernel M = Ψ'/(Ψ(1-Ψ)) and Hessian kernel K = MΨ' at one
/// index value.
///
/// `psi` is clamped to [kProbFloor, 1 - kProbFloor]. Everything else is exact
/// to working precision, including the log-domain fields, which stay accurate
/// where psidot and k underflow to subnormals (|z| > ~37 for probit).
struct LinkEval {
  double psi = 0.5;
  double psidot = 0.0;
  double m = 0.0;
  double k = 0.0;
  double mdot = 0.0;
  double loglik0 = 0.0;  ///< log(1 - Ψ(z))
  double loglik1 = 0.0;  ///< log Ψ(z)
  double log_psidot = 0.0;
  double log_k = 0.0;
};

/// Throws std::domain_error for non-finite z.
LinkEval evaluate(double z, LinkKind kind);

/// Derivative of the M kernel. Identically zero for logit.
double mdot(double z, LinkKind kind);

/// Per-cell quantities used by the block solvers: the log-likelihood
/// contribution y log Ψ + (1-y) log(1-Ψ), the score weight M(y - Ψ) and the
/// Fisher weight K. No finiteness check; callers own that.
struct CellTerms {
  double loglik;
  double score_weight;
  double fisher_weight;
};

CellTerms cell_terms(double y, double z, LinkKind kind) noexcept;

double cell_loglik(double y, double z, LinkKind kind) noexcept;

/// Unclamped Ψ(z) and Ψ'(z).
double link_probability(double z, LinkKind kind) noexcept;
double link_density(double z, LinkKind kind) noexcept;

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace nsbfm
