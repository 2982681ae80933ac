#pragma once

#include <iosfwd>
#include <string>

#include "demandirl/model.hpp"

namespace demandirl {

/// One customer model plus the plan it lives on, as read from a config
/// file.
struct ModelConfig {
  RewardParams reward;
  PriorParams prior;
  PlanSpec plan;
};

/// Parses the key=value format:
///
///   # comment lines start with '#'; blank lines are ignored
///   mu = 0.018          beta = 0.00125      (one pair per line)
///   ...
///
/// Required keys: mu, beta, gamma, eta, kappa (utility), mu0, beta0,
/// gamma0, eta0, nu0_bar (default behavior), fee, quota, price,
/// cycle_days (plan).  price accepts "inf" for no-overage plans.
/// Unknown, duplicate, or missing keys raise DataError naming them and
/// the line; numeric ranges are checked by the parameter validators.
ModelConfig parse_model_config(std::istream& in,
                               const std::string& name = "<stream>");
ModelConfig load_model_config(const std::string& path);

}  // namespace demandirl
