#pragma once

#include <optional>

#include "demandirl/model.hpp"
#include "demandirl/truncnorm.hpp"

namespace demandirl {

/// The continuous part of the behavioral prior over a day's consumption,
/// given quota remaining q, days remaining d and the plan's overage
/// price.  It is a spliced density
///
///   pi0(a) = (1 - w) * phi1(a) on (0, q]  +  w * phi2(a) on [q, inf)
///
/// where phi1 is a normal with mean (mu0 + gamma0*d)/beta0 truncated to
/// [0, q], phi2 a normal with mean (mu0 + gamma0*d - eta0*p)/beta0
/// truncated to [q, inf), both with variance 1/beta0 and each normalized
/// to one on its own branch.  The splice weight w is fixed by continuity
/// at a = q.  Degeneracies: at q = 0 the lower branch is empty (w = 1);
/// under a no-overage plan the upper branch is empty (w = 0); with both
/// (q = 0 and no overage allowed) the continuous part carries no mass at
/// all.
struct PriorComponents {
  double log_w1;  // log(1 - w), weight of the <= quota branch
  double log_w2;  // log(w), weight of the overage branch
  std::optional<TruncNormal> branch1;  // support [0, q]
  std::optional<TruncNormal> branch2;  // support [q, inf)
};

PriorComponents prior_components(const PriorParams& prior, double q, int d,
                                 double price);

/// Splice weight w (the prior probability that a positive-consumption
/// day breaches the quota).  Returns 1 at q = 0 and 0 under a
/// no-overage plan.
double prior_splice_weight(const PriorParams& prior, double q, int d,
                           double price);

/// log of the continuous prior density at a (the a > 0 part only);
/// -inf outside the support.  a == q is served by the lower branch,
/// which by construction of the splice weight equals the upper branch
/// value there.
double prior_continuous_logpdf(const PriorParams& prior, double a, double q,
                               int d, double price);

/// log prior mass/density of a full step: log(nu0_bar) at a = 0 (the
/// point mass), log(1 - nu0_bar) + continuous log density for a > 0.
/// Throws on a < 0.
double prior_logpdf(const PriorParams& prior, const ConsumptionStep& step,
                    double price);

}  // namespace demandirl
