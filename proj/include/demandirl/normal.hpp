#pragma once

namespace demandirl {

/// Scaled complementary error function exp(x^2) * erfc(x).
/// Accurate over the whole real line; never over/underflows for x >= 0.
double erfcx(double x);

/// log of the standard normal density at z.
double norm_logpdf(double z);

/// Standard normal CDF and survival function (linear space; underflow to
/// 0 beyond ~|z| = 38.5 is inherent to double precision).
double norm_cdf(double z);
double norm_sf(double z);

/// log Phi(z) and log(1 - Phi(z)), stable arbitrarily deep in either
/// tail (values like -z^2/2 are returned exactly where linear space
/// underflows).
double log_norm_cdf(double z);
double log_norm_sf(double z);

/// log P(alpha <= Z <= beta) for a standard normal Z.  Requires
/// alpha < beta (infinite endpoints allowed).  Computed without
/// cancellation for intervals deep in a tail; -inf when the mass
/// underflows even in log space (never happens for finite inputs).
double log_norm_interval(double alpha, double beta);

/// Inverse standard normal CDF (quantile function), Wichura's AS241
/// double-precision rational approximation.  p in (0, 1); returns
/// -+inf at p = 0 / 1.
double inv_norm_cdf(double p);

/// log(exp(a) + exp(b)) tolerating -inf arguments.
double logsumexp(double a, double b);

/// 1 / (1 + exp(-x)) evaluated without overflow.
double logistic(double x);

}  // namespace demandirl
