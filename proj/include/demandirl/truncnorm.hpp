#pragma once

#include "demandirl/rng.hpp"

namespace demandirl {

/// Normal distribution with mean `mean` and variance `variance`,
/// truncated (and renormalized) to [lower, upper].  Either bound may be
/// infinite.  Everything mass-related is kept in log space so the type
/// stays usable when the truncation region sits hundreds of standard
/// deviations into a tail.
struct TruncNormal {
  TruncNormal(double mean, double variance, double lower, double upper);

  double mean;
  double variance;
  double lower;
  double upper;

  double sigma;     // sqrt(variance)
  double alpha;     // (lower - mean) / sigma
  double beta;      // (upper - mean) / sigma
  double log_mass;  // log P(lower <= N(mean, variance) <= upper)
};

/// log density at x; -inf outside [lower, upper].
double truncnorm_logpdf(const TruncNormal& d, double x);

/// CDF at x in linear space (adequate away from extreme tails; tests and
/// goodness-of-fit checks use it at well-scaled points).
double truncnorm_cdf(const TruncNormal& d, double x);

/// log P(a <= X <= b) for X ~ d.  The query interval is intersected
/// with the support; empty intersection gives -inf.
double truncnorm_logcdf_interval(const TruncNormal& d, double a, double b);

struct TruncMoments {
  double m1;  // E[X]
  double m2;  // E[X^2]
};

/// First two moments, computed through scaled-erfc ratios so they stay
/// accurate for truncation regions arbitrarily deep in a tail.
TruncMoments truncnorm_moments(const TruncNormal& d);

/// Exact draw from d.  Inverse CDF on the truncated quantile scale in
/// the bulk; beyond six standard deviations the quantile scale is
/// replaced by tail-specialized rejection (translated-exponential, or
/// uniform for thin slices).
double truncnorm_sample(const TruncNormal& d, Rng& rng);

}  // namespace demandirl
