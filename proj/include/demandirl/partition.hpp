#pragma once

#include <array>

#include "demandirl/model.hpp"
#include "demandirl/prior.hpp"

namespace demandirl {

/// Log-space decomposition of the one-step normalizer
///
///   Z(q, d) = nu0_bar * e^{kappa q}
///           + (1 - nu0_bar) * (I1 + I2)
///
/// where I1 integrates prior-times-exp(utility) over the within-quota
/// branch (0, q] and I2 over the overage branch [q, inf).  Every part is
/// stored as a log so the decomposition survives regimes where I1 or I2
/// underflow linear doubles by hundreds of orders of magnitude.
struct ZParts {
  double log_atom;  // log(nu0_bar) + kappa*q   (-inf when nu0_bar = 0)
  double log_I1;    // -inf when the branch is empty or massless
  double log_I2;
  double log_Z;     // logsumexp of atom and (1-nu0_bar)(I1+I2)
};

/// ZParts plus the Gaussian geometry of the two posterior branches that
/// the same completion of squares produces: the posterior over positive
/// consumption is the same spliced family with precision b_total and
/// branch means mean1/mean2.  Shared by the posterior and expectation
/// code so the algebra lives in exactly one place.
struct PartitionDetail {
  ZParts parts;
  double b_total;  // beta0 + beta, the posterior precision
  double mean1;    // (mu0 + mu + (gamma0+gamma) d) / b_total
  double mean2;    // mean1 - (eta0+eta) p / b_total
  bool has_branch1;
  bool has_branch2;
};

PartitionDetail partition_detail(const RewardParams& reward,
                                 const PriorParams& prior, double q, int d,
                                 double price);

/// Same computation with the prior components supplied by the caller.
/// The components depend only on (prior, q, d, price), so likelihood
/// loops cache them per state and re-run only the theta-dependent part.
PartitionDetail partition_detail(const RewardParams& reward,
                                 const PriorParams& prior, double q, int d,
                                 double price, const PriorComponents& pc);

/// Closed-form evaluation of the normalizer.  Throws NumericError when
/// beta0 + beta <= 0 (the integrals diverge) or when no branch carries
/// any mass at all (nu0_bar = 0 with an empty continuous part).
ZParts z_closed_form(const RewardParams& reward, const PriorParams& prior,
                     double q, int d, double price);

/// Independent adaptive Gauss-Kronrod evaluation of the same normalizer
/// in linear space, used as the numerical oracle for z_closed_form.  The
/// integrand is split at the splice point a = q and the infinite upper
/// limit is mapped to [0, 1) by a = q + t/(1-t).  Throws NumericError if
/// the requested relative tolerance cannot be certified.
double z_quadrature(const RewardParams& reward, const PriorParams& prior,
                    double q, int d, double price, double rel_tol = 1e-9);

/// Expectation of the normalized feature vector under the one-step
/// posterior at (q, d): the gradient of log Z with respect to theta.
/// Entries whose scale is unidentified are reported as 0 (they are
/// frozen out of any fit).
std::array<double, kNumFeatures> posterior_feature_expectation(
    const RewardParams& reward, const PriorParams& prior, double q, int d,
    double price, const FeatureScales& scales);

/// Same expectation from an already-computed PartitionDetail.
std::array<double, kNumFeatures> posterior_feature_expectation(
    const PartitionDetail& detail, double q, int d,
    const FeatureScales& scales);

}  // namespace demandirl
