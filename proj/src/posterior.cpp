#include "demandirl/posterior.hpp"

#include <cmath>
#include <limits>

#include "demandirl/normal.hpp"

namespace demandirl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PosteriorAction posterior_at(const RewardParams& reward,
                             const PriorParams& prior, double q, int d,
                             double price) {
  PartitionDetail pd = partition_detail(reward, prior, q, d, price);
  const ZParts& zp = pd.parts;

  PosteriorAction post;
  post.q = q;
  post.d = d;
  post.nu = std::exp(zp.log_atom - zp.log_Z);

  bool any1 = zp.log_I1 > -kInf;
  bool any2 = zp.log_I2 > -kInf;
  if (any1 || any2) {
    post.omega = logistic(zp.log_I2 - zp.log_I1);
    double lse = logsumexp(zp.log_I1, zp.log_I2);
    post.log_w1 = zp.log_I1 - lse;
    post.log_w2 = zp.log_I2 - lse;
  } else {
    post.omega = 0.0;  // no positive mass; nu is 1 here
    post.log_w1 = -kInf;
    post.log_w2 = -kInf;
  }
  if (any1 && q > 0.0) {
    post.branch1.emplace(pd.mean1, 1.0 / pd.b_total, 0.0, q);
  }
  if (any2) {
    post.branch2.emplace(pd.mean2, 1.0 / pd.b_total, q, kInf);
  }
  return post;
}

double posterior_splice_weight_continuity(const RewardParams& reward,
                                          const PriorParams& prior, double q,
                                          int d, double price) {
  if (q == 0.0) return 1.0;
  if (is_no_overage_price(price)) return 0.0;
  PartitionDetail pd = partition_detail(reward, prior, q, d, price);
  TruncNormal b1(pd.mean1, 1.0 / pd.b_total, 0.0, q);
  TruncNormal b2(pd.mean2, 1.0 / pd.b_total, q, kInf);
  double lphi1 = truncnorm_logpdf(b1, q);
  double lphi2 = truncnorm_logpdf(b2, q);
  // Continuity (1 - w) phi1(q) = w phi2(q) on the posterior branches.
  return logistic(lphi1 - lphi2);
}

double posterior_logpdf_positive(const PosteriorAction& post, double a) {
  if (!(a > 0.0)) return -kInf;
  if ((a <= post.q || post.q == 0.0)) {
    if (post.q == 0.0) {
      return post.branch2
                 ? post.log_w2 + truncnorm_logpdf(*post.branch2, a)
                 : -kInf;
    }
    return post.branch1 ? post.log_w1 + truncnorm_logpdf(*post.branch1, a)
                        : -kInf;
  }
  return post.branch2 ? post.log_w2 + truncnorm_logpdf(*post.branch2, a)
                      : -kInf;
}

double posterior_cdf(const PosteriorAction& post, double x) {
  if (x < 0.0) return 0.0;
  double c = post.nu;
  double pos = 1.0 - post.nu;
  if (post.branch1) {
    c += pos * (1.0 - post.omega) * truncnorm_cdf(*post.branch1, x);
  }
  if (post.branch2) {
    c += pos * post.omega * truncnorm_cdf(*post.branch2, x);
  }
  return std::min(c, 1.0);
}

double sample_action(const PosteriorAction& post, Rng& rng) {
  if (rng.uniform01() < post.nu) return 0.0;
  bool take2 = rng.uniform01() < post.omega;
  const auto& b = take2 ? post.branch2 : post.branch1;
  if (!b.has_value()) {
    // Weightless side selected due to omega being exactly 0 or 1 with
    // the matching branch absent; the other branch must exist.
    const auto& other = take2 ? post.branch1 : post.branch2;
    return truncnorm_sample(*other, rng);
  }
  return truncnorm_sample(*b, rng);
}

ConsumptionPath simulate_cycle(const RewardParams& reward,
                               const PriorParams& prior, const PlanSpec& plan,
                               Rng& rng) {
  plan.validate();
  ConsumptionPath path;
  path.plan = plan;
  path.steps.reserve(plan.cycle_days);
  double q = plan.quota;
  int d = plan.cycle_days;
  while (d >= 1) {
    PosteriorAction post = posterior_at(reward, prior, q, d, plan.price);
    double a = sample_action(post, rng);
    path.steps.push_back({a, q, d});
    NextState ns = transition(path.steps.back());
    q = ns.q;
    d = ns.d;
  }
  return path;
}

std::vector<ConsumptionPath> simulate_corpus(const RewardParams& reward,
                                             const PriorParams& prior,
                                             const PlanSpec& plan,
                                             int n_cycles,
                                             std::uint64_t master_seed) {
  std::vector<ConsumptionPath> out;
  out.reserve(n_cycles);
  for (int i = 0; i < n_cycles; ++i) {
    Rng rng(Rng::substream(master_seed, static_cast<std::uint64_t>(i)));
    out.push_back(simulate_cycle(reward, prior, plan, rng));
  }
  return out;
}

}  // namespace demandirl
