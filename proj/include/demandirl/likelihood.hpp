#pragma once

#include <array>
#include <string>
#include <vector>

#include "demandirl/model.hpp"
#include "demandirl/prior.hpp"

namespace demandirl {

/// Which penalty shape the regularizer uses.  kL2 is the squared
/// Euclidean norm lambda * ||theta - theta0||_2^2 (differentiable
/// everywhere); kL1 is lambda * ||theta - theta0||_1, handled by an
/// orthant-wise quasi-Newton step around the kink at theta0.
enum class RegNorm { kL1, kL2 };

/// Settings for the likelihood objective and its minimization.
struct FitConfig {
  double lambda = 0.0;          // regularization weight, >= 0
  RegNorm norm = RegNorm::kL2;  // penalty shape when lambda > 0
  ThetaVector theta0{};         // regularization center and start point
  double grad_tol = 1e-8;       // sup-norm stationarity threshold
  int max_iter = 500;           // optimizer iteration cap

  /// Throws std::invalid_argument on lambda < 0, grad_tol <= 0,
  /// max_iter < 1, or a non-finite theta0 entry.
  void validate() const;
};

/// Empirical means of the five raw per-step statistics over every step
/// of every path; statistics whose corpus sum is zero are flagged
/// unidentified (their scale entry stays 1.0 and the coordinate is
/// frozen out of any fit).  Throws DataError on an empty corpus.
FeatureScales compute_scales(const std::vector<ConsumptionPath>& corpus);

/// Sum of the normalized feature vectors over all steps of one path.
std::array<double, kNumFeatures> path_feature_counts(
    const ConsumptionPath& path, const FeatureScales& scales);

/// Objective value and gradient at one theta.
struct NllResult {
  double value = 0.0;
  std::array<double, kNumFeatures> gradient{};
};

/// Average negative log-likelihood of the corpus under the one-step
/// maximum-entropy action model, plus the configured penalty:
///
///   value = (1/N) sum_i [ sum_t log Z_theta(q_t, d_t)
///                         - theta . Phi(path_i) ]  + penalty
///
/// with N the number of paths.  The additive constant coming from the
/// prior's own log-density along each path is dropped, so values are
/// comparable only across runs with the same prior.  The gradient is
/// exact: per step the posterior feature expectation minus the observed
/// features, averaged, plus the penalty (sub)gradient.  For the L1
/// penalty the reported gradient is the minimum-norm subgradient, the
/// natural stationarity measure at the kink.
///
/// Frozen coordinates (unidentified scale, or the overage coordinate
/// when the corpus price makes the overage sensitivity unlearnable)
/// must be exactly 0 in both theta and config.theta0; otherwise this
/// throws std::invalid_argument.  Their gradient entries are reported
/// as 0.  Throws DataError on an empty corpus or mixed corpus prices,
/// NumericError on a non-integrable model.
NllResult nll(const ThetaVector& theta,
              const std::vector<ConsumptionPath>& corpus,
              const PriorParams& prior, const FeatureScales& scales,
              const FitConfig& config);

/// Outcome of a maximum-likelihood fit.
struct FitResult {
  ThetaVector theta_hat;  // minimizer in normalized coordinates
  RewardParams raw;       // the same point as raw utility parameters
  double nll_value = 0.0;
  double grad_norm = 0.0;  // sup-norm of the final (sub)gradient
  int iterations = 0;
  bool converged = false;
  std::array<bool, kNumFeatures> identified{};  // free-coordinate flags
  FeatureScales scales;  // frozen normalization used by the fit
  double price = 0.0;    // corpus-wide overage price
  std::vector<double> nll_history;  // objective per accepted iterate
  std::vector<std::string> notes;   // frozen coordinates, stalls, ...
};

/// Minimizes the regularized objective from config.theta0 with a dense
/// quasi-Newton (BFGS) iteration and Armijo backtracking; the L1
/// penalty uses the orthant-wise variant (pseudo-gradient steepest
/// descent direction, sign-projected steps, curvature pairs from the
/// smooth part only).  The objective is convex, so the minimizer is
/// unique on the free coordinates.  Scales are computed from the corpus
/// and frozen into the result.  A result that exhausts max_iter is
/// returned with converged = false rather than thrown.
FitResult fit(const std::vector<ConsumptionPath>& corpus,
              const PriorParams& prior, const FitConfig& config);

/// JSON document with the fitted parameters, flags, scales and
/// convergence metadata.
std::string fit_result_to_json(const FitResult& result);

}  // namespace demandirl
