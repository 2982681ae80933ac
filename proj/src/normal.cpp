#include "demandirl/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace demandirl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrtPi = 0.56418958354775628695;

}  // namespace

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x >= 24.0) {
    // Asymptotic series 1/(x sqrt(pi)) * sum (-1)^n (2n-1)!! / (2x^2)^n.
    // At x = 24 the 8th term is below 1 ulp, so truncation is exact to
    // double precision.
    double ix2 = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n <= 8; ++n) {
      term *= -(2.0 * n - 1.0) * ix2;
      sum += term;
    }
    return kInvSqrtPi / x * sum;
  }
  if (x >= 0.0) {
    // exp(x^2) stays below overflow for x < 26.6 and erfc keeps full
    // precision well past x = 24, so the direct product is safe here.
    return std::exp(x * x) * std::erfc(x);
  }
  // Reflection erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows (correctly,
  // to +inf) once exp(x^2) does.
  double e = std::exp(x * x);
  if (std::isinf(e)) return e;
  return 2.0 * e - erfcx(-x);
}

double norm_logpdf(double z) { return -0.5 * (kLog2Pi + z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double norm_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double log_norm_sf(double z) {
  if (z <= 0.0) {
    // 1 - Phi(z) >= 1/2 here; linear evaluation is exact enough.
    double q = norm_sf(-z);  // = Phi(z) <= 1/2
    return std::log1p(-q);
  }
  // Q(z) = erfcx(z/sqrt(2))/2 * exp(-z^2/2); the exp factor is carried
  // in log space so the result never underflows.
  return std::log(0.5 * erfcx(z * kInvSqrt2)) - 0.5 * z * z;
}

double log_norm_cdf(double z) { return log_norm_sf(-z); }

double log_norm_interval(double alpha, double beta) {
  if (!(alpha < beta)) {
    if (alpha == beta) return -kInf;
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (beta <= 0.0) {
    // Mirror the left-tail case onto the right tail.
    double a = -beta, b = -alpha;
    alpha = a;
    beta = b;
  }
  if (alpha < 0.0) {
    // Interval straddles the mode: erf terms have opposite signs, so the
    // subtraction below is really an addition and cannot cancel.
    double lo = std::isinf(alpha) ? -1.0 : std::erf(alpha * kInvSqrt2);
    double hi = std::isinf(beta) ? 1.0 : std::erf(beta * kInvSqrt2);
    return std::log(0.5 * (hi - lo));
  }
  // Right-tail interval, alpha >= 0.
  double width = beta - alpha;
  if (width < 1e-6) {
    // Narrow slice: the erfcx difference below would cancel, so integrate
    // the density directly.  Simpson on a slice this thin is exact to
    // double precision for any |alpha| arising from finite inputs.
    double mid = alpha + 0.5 * width;
    double fa = norm_logpdf(alpha) ;
    double fm = norm_logpdf(mid) + std::log(4.0);
    double fb = norm_logpdf(beta);
    double m = std::max(fa, std::max(fm, fb));
    double s = std::exp(fa - m) + std::exp(fm - m) + std::exp(fb - m);
    return m + std::log(s * width / 6.0);
  }
  // Q(alpha) - Q(beta) with the common exp(-alpha^2/2) factored out:
  // 1/2 e^{-a^2/2} [erfcx(a/sqrt2) - erfcx(b/sqrt2) e^{(a^2-b^2)/2}].
  double t = erfcx(alpha * kInvSqrt2);
  if (std::isfinite(beta)) {
    double delta = 0.5 * (alpha - beta) * (alpha + beta);  // <= 0
    t -= erfcx(beta * kInvSqrt2) * std::exp(delta);
  }
  return std::log(0.5 * t) - 0.5 * alpha * alpha;
}

double inv_norm_cdf(double p) {
  // AS241 PPND16 (Wichura 1988), relative accuracy ~1e-16 over (0,1).
  if (std::isnan(p)) return p;
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;

  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    double num = (((((((2.5090809287301226727e+3 * r +
                        3.3430575583588128105e+4) * r +
                       6.7265770927008700853e+4) * r +
                      4.5921953931549871457e+4) * r +
                     1.3731693765509461125e+4) * r +
                    1.9715909503065514427e+3) * r +
                   1.3314166789178437745e+2) * r +
                  3.3871328727963666080e+0);
    double den = (((((((5.2264952788528545610e+3 * r +
                        2.8729085735721942674e+4) * r +
                       3.9307895800092710610e+4) * r +
                      2.1213794301586595867e+4) * r +
                     5.3941960214247511077e+3) * r +
                    6.8718700749205790830e+2) * r +
                   4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    double num = (((((((7.74545014278341407640e-4 * r +
                        2.27238449892691845833e-2) * r +
                       2.41780725177450611770e-1) * r +
                      1.27045825245236838258e+0) * r +
                     3.64784832476320460504e+0) * r +
                    5.76949722146069140550e+0) * r +
                   4.63033784615654529590e+0) * r +
                  1.42343711074968357734e+0);
    double den = (((((((1.05075007164441684324e-9 * r +
                        5.47593808499534494600e-4) * r +
                       1.51986665636164571966e-2) * r +
                      1.48103976427480074590e-1) * r +
                     6.89767334985100004550e-1) * r +
                    1.67638483018380384940e+0) * r +
                   2.05319162663775882187e+0) * r + 1.0);
    x = num / den;
  } else {
    r -= 5.0;
    double num = (((((((2.01033439929228813265e-7 * r +
                        2.71155556874348757815e-5) * r +
                       1.24266094738807843860e-3) * r +
                      2.65321895265761230930e-2) * r +
                     2.96560571828504891230e-1) * r +
                    1.78482653991729133580e+0) * r +
                   5.46378491116411436990e+0) * r +
                  6.65790464350110377720e+0);
    double den = (((((((2.04426310338993978564e-15 * r +
                        1.42151175831644588870e-7) * r +
                       1.84631831751005468180e-5) * r +
                      7.86869131145613259100e-4) * r +
                     1.48753612908506148525e-2) * r +
                    1.36929880922735805310e-1) * r +
                   5.99832206555887937690e-1) * r + 1.0);
    x = num / den;
  }
  return (q < 0.0) ? -x : x;
}

double logsumexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace demandirl
