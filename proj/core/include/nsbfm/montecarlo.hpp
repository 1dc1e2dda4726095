#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsbfm/dgp.hpp"
#include "nsbfm/mle.hpp"
#include "nsbfm/rankselect.hpp"

namespace nsbfm {

struct McConfig {
  DgpSpec spec;               ///< replication field is overwritten per draw
  int n_replications = 1;
  EstimationConfig estimation;  ///< n_factors is forced to the true count
  Index k_max = 4;
  /// Run the overfitted rank-selection fit in every replication.
  bool select_rank = true;

  void validate() const;
};

struct McReplication {
  int replication = 0;
  bool failed = false;
  std::string error;
  bool converged = false;
  int iterations = 0;
  double mae1 = 0.0;
  double mae2 = 0.0;
  double mae3 = 0.0;
  double mae4 = 0.0;         ///< mean absolute coefficient error per entry
  double mae4_euclid = 0.0;  ///< mean Euclidean norm of β̂_i - β_i
  double r_hat = 0.0;        ///< NaN when rank selection is off
};

struct McReport {
  double mae1 = 0.0;
  double mae2 = 0.0;
  double mae3 = 0.0;
  double mae4 = 0.0;
  double mae4_euclid = 0.0;
  double mean_rhat = 0.0;
  /// Share of replications with r̂ equal to the true factor count.
  double share_rhat_true = 0.0;
  int n_failed = 0;
  int n_unconverged = 0;
  std::vector<McReplication> per_replication;
};

/// Replaces the estimator, e.g. to check the metrics on known answers.
using McEstimator = std::function<FitResult(const SimulatedPanel&, const EstimationConfig&)>;

/// Called once per successful replication with the simulated data and the
/// true-rank fit. Runs on worker threads; write only to per-replication slots.
using McObserver = std::function<void(int replication, const SimulatedPanel&, const FitResult&)>;

/// Error metrics of one fit against the simulated truth.
McReplication replication_metrics(const SimulatedPanel& sim, const FitResult& fit);

/// Simulates, optionally selects the rank with k_max factors, fits at the true
/// rank and averages the metrics over successful replications. Replications
/// run in parallel; results do not depend on the worker count.
McReport run_mc(const McConfig& cfg, const McEstimator& estimator = {}, const McObserver& observer = {});

/// Per-replication rows as CSV.
void write_mc_csv(const McReport& report, const std::filesystem::path& path);

/// Header line with the design, then one row each for r_hat and MAE 1-4.
void print_mc_table(const McConfig& cfg, const McReport& report, std::ostream& os);

}  // namespace nsbfm
