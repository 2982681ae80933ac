#include "demandirl/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "demandirl/posterior.hpp"
#include "demandirl/rng.hpp"

namespace demandirl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pairwise_sum(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::size_t n = v.size();
  while (n > 1) {
    std::size_t m = 0;
    for (std::size_t i = 0; i + 1 < n; i += 2) v[m++] = v[i] + v[i + 1];
    if (n % 2 == 1) v[m++] = v[n - 1];
    n = m;
  }
  return v[0];
}

// Per-path sums of the daily utility over simulated cycles, path i on
// substream i of seed so every plan valued with the same seed shares
// its random numbers path by path.
std::vector<double> simulated_path_rewards(const RewardParams& params,
                                           const PriorParams& prior,
                                           const PlanSpec& plan, int n_paths,
                                           std::uint64_t seed) {
  if (n_paths < 1) {
    throw std::invalid_argument("n_paths must be >= 1");
  }
  plan.validate();
  std::vector<double> sums;
  sums.reserve(static_cast<std::size_t>(n_paths));
  for (int i = 0; i < n_paths; ++i) {
    Rng rng(Rng::substream(seed, static_cast<std::uint64_t>(i)));
    ConsumptionPath path = simulate_cycle(params, prior, plan, rng);
    double s = 0.0;
    for (const ConsumptionStep& step : path.steps) {
      s += reward(params, step, plan.price);
    }
    sums.push_back(s);
  }
  return sums;
}

struct MeanStd {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanStd mean_and_std_error(const std::vector<double>& xs) {
  MeanStd out;
  double n = static_cast<double>(xs.size());
  out.mean = pairwise_sum(xs) / n;
  if (xs.size() >= 2) {
    std::vector<double> dev2(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double d = xs[i] - out.mean;
      dev2[i] = d * d;
    }
    double var = pairwise_sum(std::move(dev2)) / (n - 1.0);
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

}  // namespace

PlanValue evaluate_plan(const RewardParams& params, const PriorParams& prior,
                        const PlanSpec& plan, int n_paths,
                        std::uint64_t seed) {
  std::vector<double> sums =
      simulated_path_rewards(params, prior, plan, n_paths, seed);
  MeanStd ms = mean_and_std_error(sums);
  PlanValue out;
  out.plan = plan;
  // Exactly this order: the fee term is one multiply and one add on top
  // of the fee-independent Monte Carlo mean.
  out.total_utility = -params.eta * plan.fee + ms.mean;
  out.std_error = ms.std_error;
  out.n_paths = n_paths;
  return out;
}

std::vector<PlanValue> rank_plans(const RewardParams& params,
                                  const PriorParams& prior,
                                  const std::vector<PlanSpec>& plans,
                                  int n_paths, std::uint64_t seed) {
  if (plans.empty()) {
    throw std::invalid_argument("rank_plans needs at least one plan");
  }
  std::vector<PlanValue> values;
  values.reserve(plans.size());
  for (const PlanSpec& plan : plans) {
    values.push_back(evaluate_plan(params, prior, plan, n_paths, seed));
  }
  std::stable_sort(values.begin(), values.end(),
                   [](const PlanValue& a, const PlanValue& b) {
                     if (a.total_utility != b.total_utility) {
                       return a.total_utility > b.total_utility;
                     }
                     if (a.plan.fee != b.plan.fee) {
                       return a.plan.fee < b.plan.fee;
                     }
                     return a.plan.price < b.plan.price;
                   });
  return values;
}

EtaBoundReport eta_bound_report(const PlanSpec& chosen,
                                const std::vector<PlanSpec>& alternatives,
                                const RewardParams& params,
                                const PriorParams& prior, int n_paths,
                                std::uint64_t seed) {
  EtaBoundReport report;
  report.lower_bound = -kInf;
  report.upper_bound = kInf;

  MeanStd chosen_ms = mean_and_std_error(
      simulated_path_rewards(params, prior, chosen, n_paths, seed));
  report.chosen_expected_reward = chosen_ms.mean;

  for (std::size_t i = 0; i < alternatives.size(); ++i) {
    const PlanSpec& alt = alternatives[i];
    double fee_diff = alt.fee - chosen.fee;
    if (fee_diff == 0.0) {
      report.warnings.push_back(
          "alternative " + std::to_string(i) +
          " skipped: its fee equals the chosen plan's fee, so it "
          "carries no information about the fee sensitivity");
      continue;
    }
    MeanStd alt_ms = mean_and_std_error(
        simulated_path_rewards(params, prior, alt, n_paths, seed));
    EtaBoundTerm term;
    term.alternative = alt;
    term.expected_reward_diff = alt_ms.mean - chosen_ms.mean;
    term.fee_diff = fee_diff;
    term.ratio = term.expected_reward_diff / fee_diff;
    term.is_lower = fee_diff > 0.0;
    if (term.is_lower) {
      report.lower_bound = std::max(report.lower_bound, term.ratio);
    } else {
      report.upper_bound = std::min(report.upper_bound, term.ratio);
    }
    report.terms.push_back(std::move(term));
  }
  return report;
}

double eta_lower_bound(const PlanSpec& chosen,
                       const std::vector<PlanSpec>& alternatives,
                       const RewardParams& params, const PriorParams& prior,
                       int n_paths, std::uint64_t seed) {
  return eta_bound_report(chosen, alternatives, params, prior, n_paths, seed)
      .lower_bound;
}

}  // namespace demandirl
