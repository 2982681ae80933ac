#include "demandirl/prior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "demandirl/normal.hpp"

namespace demandirl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_state(double q, int d, double price) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("prior: q must be finite and >= 0");
  }
  if (d < 1) {
    throw std::invalid_argument("prior: d must be >= 1");
  }
  if (!(price >= 0.0)) {
    throw std::invalid_argument("prior: price must be >= 0 or infinite");
  }
}
}  // namespace

PriorComponents prior_components(const PriorParams& prior, double q, int d,
                                 double price) {
  prior.validate();
  check_state(q, d, price);

  PriorComponents out{-kInf, -kInf, std::nullopt, std::nullopt};
  double var = 1.0 / prior.beta0;
  double m1 = (prior.mu0 + prior.gamma0 * d) / prior.beta0;
  bool no_overage = is_no_overage_price(price);

  if (q == 0.0) {
    if (no_overage) return out;  // no continuous mass at all
    double m2 = m1 - prior.eta0 * price / prior.beta0;
    out.log_w2 = 0.0;
    out.branch2.emplace(m2, var, 0.0, kInf);
    return out;
  }
  if (no_overage) {
    out.log_w1 = 0.0;
    out.branch1.emplace(m1, var, 0.0, q);
    return out;
  }

  double m2 = m1 - prior.eta0 * price / prior.beta0;
  out.branch1.emplace(m1, var, 0.0, q);
  out.branch2.emplace(m2, var, q, kInf);
  // Continuity at the splice point: (1-w) phi1(q) = w phi2(q), hence
  // w = phi1(q) / (phi1(q) + phi2(q)), evaluated in log space.
  double lphi1 = truncnorm_logpdf(*out.branch1, q);
  double lphi2 = truncnorm_logpdf(*out.branch2, q);
  double lse = logsumexp(lphi1, lphi2);
  out.log_w2 = lphi1 - lse;
  out.log_w1 = lphi2 - lse;
  return out;
}

double prior_splice_weight(const PriorParams& prior, double q, int d,
                           double price) {
  prior.validate();
  check_state(q, d, price);
  if (q == 0.0) return 1.0;
  if (is_no_overage_price(price)) return 0.0;
  return std::exp(prior_components(prior, q, d, price).log_w2);
}

double prior_continuous_logpdf(const PriorParams& prior, double a, double q,
                               int d, double price) {
  if (!(a >= 0.0)) {
    throw std::invalid_argument("prior density: a must be >= 0");
  }
  PriorComponents pc = prior_components(prior, q, d, price);
  if (a <= 0.0) return -kInf;  // positive part only
  if (a <= q || q == 0.0) {
    // a == q is assigned to the lower branch; the splice weight makes
    // both assignments agree to the last bit.
    const auto& b = (q == 0.0) ? pc.branch2 : pc.branch1;
    double lw = (q == 0.0) ? pc.log_w2 : pc.log_w1;
    if (!b.has_value()) return -kInf;
    return lw + truncnorm_logpdf(*b, a);
  }
  if (!pc.branch2.has_value()) return -kInf;
  return pc.log_w2 + truncnorm_logpdf(*pc.branch2, a);
}

double prior_logpdf(const PriorParams& prior, const ConsumptionStep& step,
                    double price) {
  prior.validate();
  check_state(step.q, step.d, price);
  if (!(step.a >= 0.0)) {
    throw std::invalid_argument("prior density: a must be >= 0");
  }
  if (step.a == 0.0) {
    return prior.nu0_bar > 0.0 ? std::log(prior.nu0_bar) : -kInf;
  }
  if (prior.nu0_bar >= 1.0) return -kInf;
  return std::log1p(-prior.nu0_bar) +
         prior_continuous_logpdf(prior, step.a, step.q, step.d, price);
}

}  // namespace demandirl
