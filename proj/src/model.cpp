#include "demandirl/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "demandirl/errors.hpp"

namespace demandirl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

void RewardParams::validate() const {
  require_finite(mu, "RewardParams.mu");
  require_finite(beta, "RewardParams.beta");
  require_finite(gamma, "RewardParams.gamma");
  require_finite(eta, "RewardParams.eta");
  require_finite(kappa, "RewardParams.kappa");
}

void PriorParams::validate() const {
  require_finite(mu0, "PriorParams.mu0");
  require_finite(gamma0, "PriorParams.gamma0");
  require_finite(eta0, "PriorParams.eta0");
  if (!std::isfinite(beta0) || beta0 <= 0.0) {
    throw std::invalid_argument("PriorParams.beta0 must be > 0");
  }
  if (!(nu0_bar >= 0.0 && nu0_bar <= 1.0)) {
    throw std::invalid_argument("PriorParams.nu0_bar must lie in [0, 1]");
  }
}

void PlanSpec::validate() const {
  require_finite(fee, "PlanSpec.fee");
  if (!(quota >= 0.0) || !std::isfinite(quota)) {
    throw std::invalid_argument("PlanSpec.quota must be finite and >= 0");
  }
  if (!(price >= 0.0)) {  // +inf allowed
    throw std::invalid_argument("PlanSpec.price must be >= 0 or infinite");
  }
  if (cycle_days < 1) {
    throw std::invalid_argument("PlanSpec.cycle_days must be >= 1");
  }
}

void validate_path(const ConsumptionPath& path) {
  path.plan.validate();
  const auto& s = path.steps;
  if (s.empty()) throw DataError("path has no steps");
  if (static_cast<int>(s.size()) != path.plan.cycle_days) {
    throw DataError("path has " + std::to_string(s.size()) +
                    " steps but the plan cycle is " +
                    std::to_string(path.plan.cycle_days) + " days");
  }
  if (s.front().q != path.plan.quota) {
    throw DataError("step 0: quota remaining must equal the plan quota");
  }
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto& st = s[t];
    if (!std::isfinite(st.a) || st.a < 0.0) {
      throw DataError("step " + std::to_string(t) +
                      ": consumption must be finite and >= 0");
    }
    if (!std::isfinite(st.q) || st.q < 0.0) {
      throw DataError("step " + std::to_string(t) +
                      ": quota remaining must be finite and >= 0");
    }
    if (st.d != path.plan.cycle_days - static_cast<int>(t)) {
      throw DataError("step " + std::to_string(t) +
                      ": days remaining must decrement by 1 from cycle_days");
    }
    if (t + 1 < s.size()) {
      double expect = std::max(st.q - st.a, 0.0);
      double tol = 1e-9 * std::max(1.0, st.q);
      if (std::fabs(s[t + 1].q - expect) > tol) {
        throw DataError("step " + std::to_string(t + 1) +
                        ": quota remaining does not follow (q - a)_+");
      }
    }
  }
}

const char* feature_name(std::size_t k) {
  switch (k) {
    case kFeatLin: return "consumption";
    case kFeatQuad: return "consumption_sq";
    case kFeatCross: return "consumption_x_days";
    case kFeatOver: return "overage";
    case kFeatZero: return "zero_day_quota";
    default: return "unknown";
  }
}

const char* raw_param_name(std::size_t k) {
  switch (k) {
    case kFeatLin: return "mu";
    case kFeatQuad: return "beta";
    case kFeatCross: return "gamma";
    case kFeatOver: return "eta";
    case kFeatZero: return "kappa";
    default: return "unknown";
  }
}

double reward(const RewardParams& params, const ConsumptionStep& step,
              double price) {
  double a = step.a;
  double r = params.mu * a - 0.5 * params.beta * a * a +
             params.gamma * a * step.d;
  double over = a - step.q;
  if (over > 0.0) {
    if (is_no_overage_price(price)) return -kInf;
    r -= params.eta * price * over;
  }
  if (a == 0.0) r += params.kappa * step.q;
  return r;
}

std::array<double, kNumFeatures> features(const ConsumptionStep& step,
                                          const FeatureScales& scales) {
  std::array<double, kNumFeatures> raw{
      step.a,
      step.a * step.a,
      step.a * step.d,
      std::max(step.a - step.q, 0.0),
      step.a == 0.0 ? step.q : 0.0,
  };
  std::array<double, kNumFeatures> out{};
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    if (raw[k] == 0.0) {
      out[k] = 0.0;
    } else if (!scales.identified[k]) {
      throw std::domain_error(
          std::string("feature '") + feature_name(k) +
          "' is unidentified (its corpus mean is zero) but the step has a "
          "nonzero value for it");
    } else {
      out[k] = raw[k] / scales.value[k];
    }
  }
  return out;
}

bool eta_identifiable_at_price(double price) {
  return price > 0.0 && !is_no_overage_price(price);
}

ThetaVector theta_from_raw(const RewardParams& params,
                           const FeatureScales& scales, double price) {
  ThetaVector t;
  t[kFeatLin] = scales.identified[kFeatLin]
                    ? params.mu * scales.value[kFeatLin] : 0.0;
  t[kFeatQuad] = scales.identified[kFeatQuad]
                     ? -0.5 * params.beta * scales.value[kFeatQuad] : 0.0;
  t[kFeatCross] = scales.identified[kFeatCross]
                      ? params.gamma * scales.value[kFeatCross] : 0.0;
  t[kFeatOver] = (scales.identified[kFeatOver] &&
                  eta_identifiable_at_price(price))
                     ? -params.eta * price * scales.value[kFeatOver] : 0.0;
  t[kFeatZero] = scales.identified[kFeatZero]
                     ? params.kappa * scales.value[kFeatZero] : 0.0;
  return t;
}

RewardParams raw_from_theta(const ThetaVector& theta,
                            const FeatureScales& scales, double price) {
  RewardParams p;
  p.mu = scales.identified[kFeatLin]
             ? theta[kFeatLin] / scales.value[kFeatLin] : 0.0;
  p.beta = scales.identified[kFeatQuad]
               ? -2.0 * theta[kFeatQuad] / scales.value[kFeatQuad] : 0.0;
  p.gamma = scales.identified[kFeatCross]
                ? theta[kFeatCross] / scales.value[kFeatCross] : 0.0;
  p.eta = (scales.identified[kFeatOver] && eta_identifiable_at_price(price))
              ? -theta[kFeatOver] / (price * scales.value[kFeatOver]) : 0.0;
  p.kappa = scales.identified[kFeatZero]
                ? theta[kFeatZero] / scales.value[kFeatZero] : 0.0;
  return p;
}

NextState transition(const ConsumptionStep& step) {
  if (step.d <= 0) {
    throw std::domain_error("transition: cycle is already over (d <= 0)");
  }
  return {std::max(step.q - step.a, 0.0), step.d - 1};
}

}  // namespace demandirl
