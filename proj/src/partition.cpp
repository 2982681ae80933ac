#include "demandirl/partition.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "demandirl/errors.hpp"
#include "demandirl/normal.hpp"
#include "demandirl/truncnorm.hpp"

namespace demandirl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PartitionDetail partition_detail(const RewardParams& reward,
                                 const PriorParams& prior, double q, int d,
                                 double price) {
  PriorComponents pc = prior_components(prior, q, d, price);
  return partition_detail(reward, prior, q, d, price, pc);
}

PartitionDetail partition_detail(const RewardParams& reward,
                                 const PriorParams& prior, double q, int d,
                                 double price, const PriorComponents& pc) {
  reward.validate();

  double b0 = prior.beta0;
  double b = b0 + reward.beta;
  if (!(b > 0.0)) {
    throw NumericError(
        "non-integrable posterior: beta0 + beta must be > 0, got " +
        std::to_string(b));
  }

  PartitionDetail out;
  out.b_total = b;
  out.has_branch1 = pc.branch1.has_value();
  out.has_branch2 = pc.branch2.has_value();

  double s1_prior = prior.mu0 + prior.gamma0 * d;
  double s1 = s1_prior + reward.mu + reward.gamma * d;
  out.mean1 = s1 / b;
  out.mean2 = out.mean1;  // refined below when the overage branch exists

  ZParts& zp = out.parts;
  zp.log_atom = prior.nu0_bar > 0.0
                    ? std::log(prior.nu0_bar) + reward.kappa * q
                    : -kInf;
  zp.log_I1 = -kInf;
  zp.log_I2 = -kInf;

  double half_log_b_ratio = 0.5 * (std::log(b0) - std::log(b));

  if (out.has_branch1) {
    // Completing the square in the exponent of phi1(a) e^{mu a - beta/2
    // a^2 + gamma a d} turns the integral over [0, q] into a Gaussian
    // interval mass at precision b around mean1, times the shift of
    // normalizing constants below.
    TruncNormal post1(out.mean1, 1.0 / b, 0.0, q);
    double expo = 0.5 * s1 * s1 / b - 0.5 * s1_prior * s1_prior / b0;
    zp.log_I1 = pc.log_w1 + half_log_b_ratio + expo + post1.log_mass -
                pc.branch1->log_mass;
  }
  if (out.has_branch2) {
    double pe0 = prior.eta0 * price;
    double pe = reward.eta * price;
    double s2_prior = s1_prior - pe0;
    double s2 = s2_prior + reward.mu + reward.gamma * d - pe;
    out.mean2 = s2 / b;
    TruncNormal post2(out.mean2, 1.0 / b, q, kInf);
    // The overage term -eta p (a - q) contributes the +eta p q offset
    // and shifts the branch mean; everything else mirrors branch 1.
    double expo = 0.5 * s2 * s2 / b - 0.5 * s2_prior * s2_prior / b0 +
                  pe * q;
    zp.log_I2 = pc.log_w2 + half_log_b_ratio + expo + post2.log_mass -
                pc.branch2->log_mass;
  }

  double log_cont = -kInf;
  if (prior.nu0_bar < 1.0) {
    log_cont = std::log1p(-prior.nu0_bar) + logsumexp(zp.log_I1, zp.log_I2);
  }
  zp.log_Z = logsumexp(zp.log_atom, log_cont);
  if (zp.log_Z == -kInf) {
    throw NumericError(
        "degenerate model: no action carries any probability mass "
        "(nu0_bar = 0 with an empty continuous prior)");
  }
  return out;
}

ZParts z_closed_form(const RewardParams& reward, const PriorParams& prior,
                     double q, int d, double price) {
  return partition_detail(reward, prior, q, d, price).parts;
}

namespace {

// Log of the continuous integrand pi0(a) * exp(utility(a)) given
// precomputed prior components; -inf off-support.
double log_integrand(const PriorComponents& pc, const RewardParams& reward,
                     double a, double q, int d, double price) {
  double lp;
  if (a <= 0.0) {
    return -kInf;
  } else if (a <= q || q == 0.0) {
    const auto& b = (q == 0.0) ? pc.branch2 : pc.branch1;
    double lw = (q == 0.0) ? pc.log_w2 : pc.log_w1;
    if (!b.has_value()) return -kInf;
    lp = lw + truncnorm_logpdf(*b, a);
  } else {
    if (!pc.branch2.has_value()) return -kInf;
    lp = pc.log_w2 + truncnorm_logpdf(*pc.branch2, a);
  }
  double r = reward.mu * a - 0.5 * reward.beta * a * a +
             reward.gamma * a * d;
  if (a > q) r -= reward.eta * price * (a - q);
  return lp + r;
}

struct PanelSum {
  double value = 0.0;
  double error = 0.0;
};

template <typename F>
void integrate_panels(const F& f, const std::vector<double>& cuts,
                      PanelSum* acc) {
  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i] < cuts[i + 1])) continue;
    double err = 0.0;
    double v = gauss_kronrod<double, 15>::integrate(
        f, cuts[i], cuts[i + 1], 15, 1e-12, &err);
    acc->value += v;
    acc->error += err;
  }
}

// Cut points that bracket the integrand's peak so the first Kronrod
// panel cannot step over a narrow mass concentration.
std::vector<double> bracket_cuts(double lo, double hi, double peak,
                                 double sigma) {
  std::vector<double> cuts{lo};
  for (double c : {peak - 8.0 * sigma, peak + 8.0 * sigma}) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace

double z_quadrature(const RewardParams& reward, const PriorParams& prior,
                    double q, int d, double price, double rel_tol) {
  // Recomputed here rather than taken from z_closed_form: this routine
  // is the oracle, so it shares only the prior density with the closed
  // form, not the completed-square algebra.
  reward.validate();
  PriorComponents pc = prior_components(prior, q, d, price);
  double b = prior.beta0 + reward.beta;
  if (!(b > 0.0)) {
    throw NumericError("non-integrable posterior: beta0 + beta must be > 0");
  }
  double sigma = 1.0 / std::sqrt(b);

  double atom = prior.nu0_bar > 0.0
                    ? prior.nu0_bar * std::exp(reward.kappa * q)
                    : 0.0;

  PanelSum acc;
  auto f = [&](double a) {
    double lv = log_integrand(pc, reward, a, q, d, price);
    return lv == -kInf ? 0.0 : std::exp(lv);
  };

  if (q > 0.0 && pc.branch1.has_value()) {
    double peak1 = (prior.mu0 + reward.mu +
                    (prior.gamma0 + reward.gamma) * d) / b;
    integrate_panels(f, bracket_cuts(0.0, q, peak1, sigma), &acc);
  }
  if (pc.branch2.has_value()) {
    double pe = (prior.eta0 + reward.eta) * price;
    double peak2 = (prior.mu0 + reward.mu +
                    (prior.gamma0 + reward.gamma) * d - pe) / b;
    // Map [q, inf) to t in [0, 1) via a = q + t/(1-t).
    auto g = [&](double t) {
      if (t >= 1.0) return 0.0;
      double om = 1.0 - t;
      double a = q + t / om;
      return f(a) / (om * om);
    };
    std::vector<double> cuts{0.0};
    for (double c : {peak2 - 8.0 * sigma, peak2 + 8.0 * sigma}) {
      if (c > q) {
        double t = (c - q) / (1.0 + (c - q));
        if (t > 0.0 && t < 1.0) cuts.push_back(t);
      }
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    integrate_panels(g, cuts, &acc);
  }

  double z = atom + (prior.nu0_bar < 1.0 ? (1.0 - prior.nu0_bar) * acc.value
                                         : 0.0);
  double abs_err = (1.0 - prior.nu0_bar) * acc.error;
  if (!(abs_err <= rel_tol * std::max(z, 1e-300))) {
    throw NumericError(
        "quadrature did not converge: estimate " + std::to_string(z) +
        " with absolute error estimate " + std::to_string(abs_err));
  }
  if (z <= 0.0) {
    throw NumericError("degenerate model: zero total mass in quadrature");
  }
  return z;
}

std::array<double, kNumFeatures> posterior_feature_expectation(
    const RewardParams& reward, const PriorParams& prior, double q, int d,
    double price, const FeatureScales& scales) {
  PartitionDetail pd = partition_detail(reward, prior, q, d, price);
  return posterior_feature_expectation(pd, q, d, scales);
}

std::array<double, kNumFeatures> posterior_feature_expectation(
    const PartitionDetail& pd, double q, int d,
    const FeatureScales& scales) {
  const ZParts& zp = pd.parts;

  double nu = std::exp(zp.log_atom - zp.log_Z);
  double log_cont = logsumexp(zp.log_I1, zp.log_I2);

  double e_a = 0.0, e_a2 = 0.0, e_over = 0.0;
  if (log_cont > -kInf) {
    double pos_mass = 1.0 - nu;
    double w1 = std::exp(zp.log_I1 - log_cont);
    double w2 = std::exp(zp.log_I2 - log_cont);
    if (pd.has_branch1 && w1 > 0.0 && q > 0.0) {
      TruncMoments m = truncnorm_moments(
          TruncNormal(pd.mean1, 1.0 / pd.b_total, 0.0, q));
      e_a += pos_mass * w1 * m.m1;
      e_a2 += pos_mass * w1 * m.m2;
    }
    if (pd.has_branch2 && w2 > 0.0) {
      TruncMoments m = truncnorm_moments(
          TruncNormal(pd.mean2, 1.0 / pd.b_total, q, kInf));
      e_a += pos_mass * w2 * m.m1;
      e_a2 += pos_mass * w2 * m.m2;
      e_over += pos_mass * w2 * (m.m1 - q);
    }
  }

  std::array<double, kNumFeatures> raw{
      e_a,
      e_a2,
      e_a * d,
      e_over,
      nu * q,
  };
  std::array<double, kNumFeatures> out{};
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    out[k] = scales.identified[k] ? raw[k] / scales.value[k] : 0.0;
  }
  return out;
}

}  // namespace demandirl
