#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "demandirl/model.hpp"
#include "demandirl/partition.hpp"
#include "demandirl/rng.hpp"
#include "demandirl/truncnorm.hpp"

namespace demandirl {

/// One-day action distribution after the utility reweights the prior:
/// a point mass nu at a = 0 plus, with weight 1 - nu, a spliced pair of
/// truncated normals over positive consumption (branch1 within quota,
/// branch2 overage, mixed with weight omega on branch2).  Branches that
/// carry no mass are absent.
struct PosteriorAction {
  double nu = 0.0;     // P(a = 0)
  double omega = 0.0;  // P(overage branch | a > 0)
  // log(1 - omega) and log(omega) carried at full precision; densities
  // use these so branch weights survive omega rounding to 0 or 1.
  double log_w1 = 0.0;
  double log_w2 = 0.0;
  std::optional<TruncNormal> branch1;  // support [0, q]
  std::optional<TruncNormal> branch2;  // support [q, inf)
  double q = 0.0;
  int d = 0;
};

/// Builds the posterior at state (q, d).  nu comes from the atom share
/// of the normalizer and omega from the branch integrals, omega =
/// logistic(log_I2 - log_I1).
PosteriorAction posterior_at(const RewardParams& reward,
                             const PriorParams& prior, double q, int d,
                             double price);

/// Independent route to omega: impose density continuity at a = q on
/// the posterior's own spliced branches, never touching the branch
/// integrals.  Must agree with PosteriorAction::omega analytically;
/// kept as a cross-check of the completed-square algebra.
double posterior_splice_weight_continuity(const RewardParams& reward,
                                          const PriorParams& prior, double q,
                                          int d, double price);

/// log density of the positive part (conditional on a > 0) at a; a == q
/// is served by the within-quota branch.  -inf off support.
double posterior_logpdf_positive(const PosteriorAction& post, double a);

/// Full-mixture CDF P(A <= x), including the atom at zero.
double posterior_cdf(const PosteriorAction& post, double x);

/// Draws one day's consumption.
double sample_action(const PosteriorAction& post, Rng& rng);

/// Simulates one billing cycle from the plan's initial state, recording
/// (a, q, d) per day, consuming one Rng stream.
ConsumptionPath simulate_cycle(const RewardParams& reward,
                               const PriorParams& prior, const PlanSpec& plan,
                               Rng& rng);

/// Simulates n independent cycles, each on its own substream of
/// master_seed, so the corpus is reproducible and independent of any
/// scheduling order.
std::vector<ConsumptionPath> simulate_corpus(const RewardParams& reward,
                                             const PriorParams& prior,
                                             const PlanSpec& plan,
                                             int n_cycles,
                                             std::uint64_t master_seed);

}  // namespace demandirl
