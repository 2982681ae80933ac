#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "demandirl/likelihood.hpp"
#include "demandirl/model.hpp"

namespace demandirl {

/// Settings for the finite-sample estimator study: for each history
/// length in n_months_list, simulate n_repeats independent corpora at
/// true_reward, fit each one, and characterize the spread of the
/// estimates.
struct ExperimentConfig {
  std::vector<int> n_months_list;  // history lengths (cycles per corpus)
  int n_repeats = 1;
  RewardParams true_reward;
  PriorParams prior;
  PlanSpec plan;
  std::uint64_t master_seed = 0;
  int n_threads = 1;       // worker threads over repeats
  int hist_bins = 20;      // bins per parameter histogram
  FitConfig fit_config{};  // lambda = 0: plain maximum likelihood

  /// Throws std::invalid_argument on empty or non-positive month list,
  /// n_repeats < 1, n_threads < 1, or hist_bins < 1.
  void validate() const;
};

/// Equal-width histogram; counts[i] covers [edges[i], edges[i+1]), with
/// the last bin closed on the right.
struct Histogram {
  std::vector<double> edges;  // hist_bins + 1 ascending edges
  std::vector<int> counts;    // hist_bins entries
};

/// Spread of one parameter's estimates at one history length.
struct ParamStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample std (n-1); 0 by convention when n < 2
  double bias = 0.0;    // mean - truth
  Histogram hist;       // converged estimates only
  bool degenerate = false;  // fewer than 2 converged estimates
};

/// All five parameters' spreads at one history length.  Bin edges are
/// shared per parameter across every history length of one run, so the
/// histograms are directly comparable.
struct EstimatorStats {
  int n_months = 0;
  int n_repeats = 0;
  int n_converged = 0;  // non-converged fits are counted and excluded
  std::array<ParamStats, kNumFeatures> params;  // mu..kappa order
};

/// Runs the study: repeat r of history length i simulates its corpus on
/// substream (i, r) of master_seed, so results are reproducible and
/// independent of thread count or completion order (estimates land in
/// preassigned slots and are sorted before aggregation).  Returns one
/// entry per n_months_list element, in input order.
std::vector<EstimatorStats> run_finite_sample_experiment(
    const ExperimentConfig& cfg);

/// Stats table `param,n_months,mean,std,bias,n_converged`, parameters
/// outer, history lengths inner.
void write_experiment_stats_csv(std::ostream& out,
                                const std::vector<EstimatorStats>& stats);

/// One parameter's histogram across history lengths:
/// `bin_lo,bin_hi,count_m<N1>,count_m<N2>,...`.
void write_histogram_csv(std::ostream& out,
                         const std::vector<EstimatorStats>& stats,
                         std::size_t param_index);

}  // namespace demandirl
