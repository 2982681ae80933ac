#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

namespace demandirl {

/// Sentinel price for plans that do not allow consumption beyond the
/// quota at any cost.  It is the IEEE infinity, so it compares greater
/// than every finite price and survives config/CSV round trips as "inf".
inline constexpr double kInfinitePrice =
    std::numeric_limits<double>::infinity();

inline bool is_no_overage_price(double price) {
  return price == kInfinitePrice;
}

/// Raw parameters of the daily utility
///   r(a, q, d) = mu*a - beta/2*a^2 + gamma*a*d - eta*p*(a-q)_+ +
///                kappa*q*1{a=0}
/// where a is the day's consumption, q the quota remaining at the start
/// of the day, d the number of days left in the billing cycle (counting
/// the current one) and p the overage price per unit.
struct RewardParams {
  double mu = 0.0;     // linear taste for consumption
  double beta = 0.0;   // quadratic satiation (> 0 for an integrable model)
  double gamma = 0.0;  // interaction with remaining days
  double eta = 0.0;    // sensitivity to overage charges
  double kappa = 0.0;  // value of saving the full remaining quota

  /// Throws std::invalid_argument on non-finite entries.
  void validate() const;
};

/// Parameters of the consumer's default (pre-utility) daily behavior: a
/// point mass at zero consumption with weight nu0_bar, plus a spliced
/// Gaussian over positive consumption built from an analogous parameter
/// set (mu0, beta0, gamma0, eta0).
struct PriorParams {
  double mu0 = 0.0;
  double beta0 = 0.0;  // must be > 0
  double gamma0 = 0.0;
  double eta0 = 0.0;
  double nu0_bar = 0.0;  // zero-day weight, in [0, 1]

  void validate() const;
};

/// A service plan: monthly fee, included quota, per-unit overage price
/// (kInfinitePrice for plans that forbid overage) and cycle length in
/// days.
struct PlanSpec {
  double fee = 0.0;
  double quota = 0.0;
  double price = 0.0;
  int cycle_days = 30;

  void validate() const;
};

/// One observed (or simulated) day: consumption a, quota remaining q at
/// the start of the day, and days remaining d (d = cycle length on the
/// first day, 1 on the last).
struct ConsumptionStep {
  double a = 0.0;
  double q = 0.0;
  int d = 0;
};

/// One billing cycle of daily steps under a plan.
struct ConsumptionPath {
  std::vector<ConsumptionStep> steps;
  PlanSpec plan;
};

/// Validates the within-cycle bookkeeping: d decrements by exactly one
/// per step ending at 1, q follows q' = (q - a)_+, the first step has
/// q = plan.quota and d = plan.cycle_days, and all entries are finite
/// and non-negative.  Throws DataError naming the offending step.
void validate_path(const ConsumptionPath& path);

/// Feature indices.  The five features of a step are, in order:
///   a / <a>,  a^2 / <a^2>,  a*d / <a*d>,  (a-q)_+ / <(a-q)_+>,
///   q*1{a=0} / <q*1{a=0}>
/// with <.> the corpus means stored in FeatureScales.
enum FeatureIndex : std::size_t {
  kFeatLin = 0,
  kFeatQuad = 1,
  kFeatCross = 2,
  kFeatOver = 3,
  kFeatZero = 4,
  kNumFeatures = 5,
};

/// Human-readable name of a feature (for error messages and CSV/JSON
/// headers).
const char* feature_name(std::size_t k);

/// Name of the raw utility parameter tied to feature k (mu, beta,
/// gamma, eta, kappa).
const char* raw_param_name(std::size_t k);

/// Empirical normalization constants of the five features.  A scale is
/// identified only if the corresponding raw statistic had a nonzero sum
/// over the corpus; unidentified entries hold 1.0 and must not be used
/// to normalize a nonzero feature value.
struct FeatureScales {
  std::array<double, kNumFeatures> value{1.0, 1.0, 1.0, 1.0, 1.0};
  std::array<bool, kNumFeatures> identified{true, true, true, true, true};
};

/// Coefficient vector on the scale-normalized features.  theta dot
/// features(step) reproduces reward(step) exactly; the normalization
/// keeps the maximum-likelihood problem well conditioned.
struct ThetaVector {
  std::array<double, kNumFeatures> v{0.0, 0.0, 0.0, 0.0, 0.0};

  double& operator[](std::size_t k) { return v[k]; }
  double operator[](std::size_t k) const { return v[k]; }
};

/// Daily utility.  Returns -inf for overage under a no-overage plan.
double reward(const RewardParams& params, const ConsumptionStep& step,
              double price);

/// Normalized feature vector of a step.  A feature whose raw value is
/// zero contributes 0 regardless of its scale; a nonzero raw value with
/// an unidentified scale throws (the feature cannot be normalized).
std::array<double, kNumFeatures> features(const ConsumptionStep& step,
                                          const FeatureScales& scales);

/// Conversions between raw utility parameters and the normalized
/// coefficient vector.  They are mutually inverse whenever every scale
/// is identified and 0 < price < inf; the eta component is pinned to 0
/// (eta unidentifiable) when the price is zero or infinite, and any
/// component with an unidentified scale is pinned to 0.
ThetaVector theta_from_raw(const RewardParams& params,
                           const FeatureScales& scales, double price);
RewardParams raw_from_theta(const ThetaVector& theta,
                            const FeatureScales& scales, double price);

/// Whether eta can be recovered from theta at this price.
bool eta_identifiable_at_price(double price);

/// Deterministic state update: next quota (q - a)_+ and next remaining
/// days d - 1.  Throws on d <= 0 (the cycle is already over).
struct NextState {
  double q;
  int d;
};
NextState transition(const ConsumptionStep& step);

}  // namespace demandirl
