#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demandirl/model.hpp"

namespace demandirl {

/// Monte Carlo valuation of one plan for one customer model.
struct PlanValue {
  PlanSpec plan;
  double total_utility = 0.0;  // -eta * fee + mean summed per-day utility
  double std_error = 0.0;      // sample std of path sums / sqrt(n_paths)
  int n_paths = 0;
};

/// Simulates n_paths billing cycles under the plan (path i on substream
/// i of seed) and returns
///
///   total_utility = (-reward.eta * plan.fee) + mean_i sum_t r(step_t)
///
/// computed in exactly that order, so with a fixed seed the value is an
/// exactly linear function of the fee with slope -eta: the fee never
/// touches the simulation itself.  std_error is 0 when n_paths == 1.
/// Throws std::invalid_argument on n_paths < 1.
PlanValue evaluate_plan(const RewardParams& reward, const PriorParams& prior,
                        const PlanSpec& plan, int n_paths,
                        std::uint64_t seed);

/// Values every plan with the same seed (common random numbers: path i
/// reuses substream i across plans) and sorts descending by
/// total_utility; ties break toward the lower fee, then the lower
/// price, then input order.  Throws std::invalid_argument on an empty
/// plan list.
std::vector<PlanValue> rank_plans(const RewardParams& reward,
                                  const PriorParams& prior,
                                  const std::vector<PlanSpec>& plans,
                                  int n_paths, std::uint64_t seed);

/// One alternative's contribution to the fee-sensitivity bound.
struct EtaBoundTerm {
  PlanSpec alternative;
  double expected_reward_diff = 0.0;  // E_alt - E_chosen (fee term excluded)
  double fee_diff = 0.0;              // F_alt - F_chosen
  double ratio = 0.0;                 // expected_reward_diff / fee_diff
  bool is_lower = false;              // fee_diff > 0 bounds eta from below
};

/// Revealed-preference bounds on eta.  The customer kept `chosen` over
/// every alternative, so -eta*F_chosen + E_chosen >= -eta*F_alt + E_alt
/// for each alternative; rearranged, alternatives with a larger fee
/// bound eta from below and alternatives with a smaller fee bound it
/// from above.  Expected rewards are Monte Carlo means over n_paths
/// cycles with common random numbers across plans.
struct EtaBoundReport {
  double lower_bound = 0.0;  // -inf when no alternative has a larger fee
  double upper_bound = 0.0;  // +inf when no alternative has a smaller fee
  double chosen_expected_reward = 0.0;
  std::vector<EtaBoundTerm> terms;    // equal-fee alternatives excluded
  std::vector<std::string> warnings;  // one per skipped alternative
};

/// The full bound computation.  `reward` supplies the simulation's
/// utility parameters; its eta only matters on plans where overage is
/// possible and priced, so for no-overage plan menus the bound is a
/// genuine way to learn eta, and otherwise it serves as a consistency
/// check of a fitted eta.
EtaBoundReport eta_bound_report(const PlanSpec& chosen,
                                const std::vector<PlanSpec>& alternatives,
                                const RewardParams& reward,
                                const PriorParams& prior, int n_paths,
                                std::uint64_t seed);

/// Just the lower bound: max over alternatives with a larger fee of
/// (E_alt - E_chosen) / (F_alt - F_chosen); -inf if there is none.
double eta_lower_bound(const PlanSpec& chosen,
                       const std::vector<PlanSpec>& alternatives,
                       const RewardParams& reward, const PriorParams& prior,
                       int n_paths, std::uint64_t seed);

}  // namespace demandirl
