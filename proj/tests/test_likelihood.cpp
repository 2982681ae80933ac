// Average negative log-likelihood, its analytic gradient, convexity,
// and the quasi-Newton fit with L1/L2 regularization and frozen
// unidentifiable coordinates.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "demandirl/errors.hpp"
#include "demandirl/likelihood.hpp"
#include "demandirl/model.hpp"
#include "demandirl/posterior.hpp"
#include "demandirl/rng.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace demandirl;

namespace {
const RewardParams kBase{0.018, 0.00125, 0.0005, 0.1666, 0.0007};
const PriorParams kPrior{0.018, 0.00125, 0.0005, 0.1666, 0.05};
const PlanSpec kPlan{0.0, 600.0, 0.55, 30};

std::vector<ConsumptionPath> corpus(int n, std::uint64_t seed) {
  return simulate_corpus(kBase, kPrior, kPlan, n, seed);
}

double sup_diff(const ThetaVector& a, const ThetaVector& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    m = std::max(m, std::fabs(a[k] - b[k]));
  }
  return m;
}
}  // namespace

TEST_CASE("compute_scales: hand corpus and identification flags") {
  ConsumptionPath p1;
  p1.plan = {0.0, 50.0, 0.55, 2};
  p1.steps = {{30.0, 50.0, 2}, {40.0, 20.0, 1}};  // day 2 overage of 20
  ConsumptionPath p2;
  p2.plan = {0.0, 50.0, 0.55, 2};
  p2.steps = {{0.0, 50.0, 2}, {10.0, 50.0, 1}};  // day 1 is a zero day
  FeatureScales s = compute_scales({p1, p2});
  // Means over the 4 steps.
  CHECK(s.value[kFeatLin] == doctest::Approx((30 + 40 + 0 + 10) / 4.0));
  CHECK(s.value[kFeatQuad] ==
        doctest::Approx((900 + 1600 + 0 + 100) / 4.0));
  CHECK(s.value[kFeatCross] ==
        doctest::Approx((60 + 40 + 0 + 10) / 4.0));
  CHECK(s.value[kFeatOver] == doctest::Approx(20.0 / 4.0));
  CHECK(s.value[kFeatZero] == doctest::Approx(50.0 / 4.0));
  for (std::size_t k = 0; k < kNumFeatures; ++k) CHECK(s.identified[k]);
}

TEST_CASE("constant consumption leaves overage and zero-day unidentified") {
  ConsumptionPath p;
  p.plan = {0.0, 100.0, 0.55, 3};
  p.steps = {{20.0, 100.0, 3}, {20.0, 80.0, 2}, {20.0, 60.0, 1}};
  FeatureScales s = compute_scales({p});
  CHECK(s.value[kFeatLin] == doctest::Approx(20.0));
  CHECK(s.value[kFeatQuad] == doctest::Approx(400.0));
  CHECK(s.identified[kFeatLin]);
  CHECK(s.identified[kFeatQuad]);
  CHECK(s.identified[kFeatCross]);
  CHECK(!s.identified[kFeatOver]);
  CHECK(!s.identified[kFeatZero]);
  CHECK(s.value[kFeatOver] == 1.0);  // placeholder, never used
}

TEST_CASE("scales agree with an independent streaming pass") {
  std::vector<ConsumptionPath> c = corpus(40, 11);
  FeatureScales s = compute_scales(c);
  std::array<double, kNumFeatures> acc{};
  std::size_t n = 0;
  for (const auto& path : c) {
    for (const auto& st : path.steps) {
      acc[kFeatLin] += st.a;
      acc[kFeatQuad] += st.a * st.a;
      acc[kFeatCross] += st.a * st.d;
      acc[kFeatOver] += st.a > st.q ? st.a - st.q : 0.0;
      acc[kFeatZero] += st.a == 0.0 ? st.q : 0.0;
      ++n;
    }
  }
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    CHECK(s.value[k] ==
          doctest::Approx(acc[k] / static_cast<double>(n)).epsilon(1e-13));
  }
}

TEST_CASE("path feature counts match a direct summation") {
  std::vector<ConsumptionPath> c = corpus(3, 5);
  FeatureScales s = compute_scales(c);
  for (const auto& path : c) {
    auto counts = path_feature_counts(path, s);
    std::array<double, kNumFeatures> want{};
    for (const auto& st : path.steps) {
      auto f = features(st, s);
      for (std::size_t k = 0; k < kNumFeatures; ++k) want[k] += f[k];
    }
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      CHECK(counts[k] == doctest::Approx(want[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero coefficients give exactly the prior: NLL(0) = 0") {
  std::vector<ConsumptionPath> c = corpus(20, 3);
  FeatureScales s = compute_scales(c);
  FitConfig cfg;
  NllResult r = nll(ThetaVector{}, c, kPrior, s, cfg);
  CHECK(std::fabs(r.value) < 1e-12);
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (std::uint64_t seed : {42ULL, 43ULL}) {
    std::vector<ConsumptionPath> c = corpus(10, seed);
    FeatureScales s = compute_scales(c);
    ThetaVector th = theta_from_raw(kBase, s, kPlan.price);
    Rng rng(seed);
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      th[k] *= 0.8 + 0.4 * rng.uniform01();  // move off the optimum
    }
    for (double lambda : {0.0, 0.02}) {
      FitConfig cfg;
      cfg.lambda = lambda;  // L2 by default
      NllResult r = nll(th, c, kPrior, s, cfg);
      double sup_fd = 0.0;
      std::array<double, kNumFeatures> fd{};
      for (std::size_t k = 0; k < kNumFeatures; ++k) {
        double h = 1e-5 * std::max(1.0, std::fabs(th[k]));
        ThetaVector up = th, dn = th;
        up[k] += h;
        dn[k] -= h;
        fd[k] = (nll(up, c, kPrior, s, cfg).value -
                 nll(dn, c, kPrior, s, cfg).value) /
                (2.0 * h);
        sup_fd = std::max(sup_fd, std::fabs(fd[k]));
      }
      for (std::size_t k = 0; k < kNumFeatures; ++k) {
        CAPTURE(seed);
        CAPTURE(lambda);
        CAPTURE(k);
        CHECK(std::fabs(r.gradient[k] - fd[k]) <=
              1e-5 * std::max(sup_fd, std::fabs(fd[k])));
      }
    }
  }
}

TEST_CASE("the objective is midpoint-convex") {
  std::vector<ConsumptionPath> c = corpus(20, 17);
  FeatureScales s = compute_scales(c);
  FitConfig cfg;
  Rng rng(2718);
  auto draw_theta = [&]() {
    // Draw in raw space where integrability (beta > 0) is explicit.
    RewardParams p;
    p.mu = -0.05 + 0.1 * rng.uniform01();
    p.beta = 1e-4 + 0.004 * rng.uniform01();
    p.gamma = -0.002 + 0.004 * rng.uniform01();
    p.eta = 0.4 * rng.uniform01();
    p.kappa = -0.002 + 0.004 * rng.uniform01();
    return theta_from_raw(p, s, kPlan.price);
  };
  for (int probe = 0; probe < 150; ++probe) {
    ThetaVector x = draw_theta(), y = draw_theta(), mid;
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      mid[k] = 0.5 * (x[k] + y[k]);
    }
    double fx = nll(x, c, kPrior, s, cfg).value;
    double fy = nll(y, c, kPrior, s, cfg).value;
    double fm = nll(mid, c, kPrior, s, cfg).value;
    CHECK(fm <= 0.5 * (fx + fy) +
                    1e-9 * std::max(1.0, 0.5 * (std::fabs(fx) +
                                                std::fabs(fy))));
  }
}

TEST_CASE("plain maximum likelihood recovers the generating parameters") {
  std::vector<ConsumptionPath> c = corpus(400, 7);
  FitConfig cfg;
  FitResult r = fit(c, kPrior, cfg);
  CHECK(r.converged);
  CHECK(r.grad_norm <= cfg.grad_tol);
  CHECK(r.iterations <= cfg.max_iter);
  CHECK(std::fabs(r.raw.mu - kBase.mu) <= 0.4 * kBase.mu);
  CHECK(std::fabs(r.raw.beta - kBase.beta) <= 0.4 * kBase.beta);
  CHECK(std::fabs(r.raw.eta - kBase.eta) <= 0.4 * kBase.eta);
  for (std::size_t k = 0; k < kNumFeatures; ++k) CHECK(r.identified[k]);
  CHECK(r.price == kPlan.price);
}

TEST_CASE("recorded objective history never rises beyond rounding") {
  std::vector<ConsumptionPath> c = corpus(120, 10);
  FitConfig cfg;
  FitResult r = fit(c, kPrior, cfg);
  REQUIRE(r.nll_history.size() >= 2);
  for (std::size_t i = 0; i + 1 < r.nll_history.size(); ++i) {
    CHECK(r.nll_history[i + 1] <=
          r.nll_history[i] +
              1e-12 * std::max(1.0, std::fabs(r.nll_history[i])));
  }
  CHECK(r.nll_value == r.nll_history.back());
}

TEST_CASE("different starting points reach the same minimum") {
  std::vector<ConsumptionPath> c = corpus(120, 21);
  FeatureScales s = compute_scales(c);
  FitConfig from_zero;
  FitConfig from_truth;
  from_truth.theta0 = theta_from_raw(kBase, s, kPlan.price);
  FitResult a = fit(c, kPrior, from_zero);
  FitResult b = fit(c, kPrior, from_truth);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(sup_diff(a.theta_hat, b.theta_hat) <= 1e-6);
}

TEST_CASE("a heavy squared-norm penalty pins the fit to its center") {
  std::vector<ConsumptionPath> c = corpus(60, 33);
  FitConfig free_cfg;
  FitResult free_fit = fit(c, kPrior, free_cfg);
  FitConfig ridge;
  ridge.lambda = 1e4;
  FitResult pinned = fit(c, kPrior, ridge);
  REQUIRE(free_fit.converged);
  REQUIRE(pinned.converged);
  double free_norm = 0.0, pinned_norm = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    free_norm = std::max(free_norm, std::fabs(free_fit.theta_hat[k]));
    pinned_norm = std::max(pinned_norm, std::fabs(pinned.theta_hat[k]));
  }
  CHECK(pinned_norm < 0.05 * free_norm);
}

TEST_CASE("the L1 penalty shrinks and produces exact zeros") {
  std::vector<ConsumptionPath> c = corpus(60, 34);
  FitConfig plain;
  FitResult base_fit = fit(c, kPrior, plain);
  FitConfig lasso;
  lasso.lambda = 0.25;
  lasso.norm = RegNorm::kL1;
  FitResult l1 = fit(c, kPrior, lasso);
  REQUIRE(base_fit.converged);
  REQUIRE(l1.converged);
  double n0 = 0.0, n1 = 0.0;
  int exact_zeros = 0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    n0 += std::fabs(base_fit.theta_hat[k]);
    n1 += std::fabs(l1.theta_hat[k]);
    if (l1.theta_hat[k] == 0.0) ++exact_zeros;
  }
  CHECK(n1 < n0);
  CHECK(exact_zeros >= 1);
}

TEST_CASE("a free overage price freezes eta and recommends the bound") {
  PlanSpec free_plan = kPlan;
  free_plan.price = 0.0;
  std::vector<ConsumptionPath> c =
      simulate_corpus(kBase, kPrior, free_plan, 80, 12);
  FitConfig cfg;
  FitResult r = fit(c, kPrior, cfg);
  CHECK(r.converged);
  CHECK(!r.identified[kFeatOver]);
  CHECK(r.raw.eta == 0.0);
  CHECK(r.theta_hat[kFeatOver] == 0.0);
  bool mentions_bound = false;
  for (const std::string& n : r.notes) {
    if (n.find("bound-eta") != std::string::npos) mentions_bound = true;
  }
  CHECK(mentions_bound);

  // Asking the fit to move a frozen coordinate is a caller error.
  FitConfig bad = cfg;
  bad.theta0[kFeatOver] = 0.3;
  try {
    (void)fit(c, kPrior, bad);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("cannot be learned") != std::string::npos);
    CHECK(msg.find(feature_name(kFeatOver)) != std::string::npos);
  }
}

TEST_CASE("a corpus with no zero days freezes the zero-day coordinate") {
  PriorParams never_zero = kPrior;
  never_zero.nu0_bar = 0.0;
  std::vector<ConsumptionPath> c =
      simulate_corpus(kBase, never_zero, kPlan, 60, 44);
  for (const auto& p : c) {
    for (const auto& st : p.steps) REQUIRE(st.a > 0.0);
  }
  FitResult r = fit(c, never_zero, FitConfig{});
  CHECK(r.converged);
  CHECK(!r.identified[kFeatZero]);
  CHECK(r.raw.kappa == 0.0);
}

TEST_CASE("corpus validation errors") {
  CHECK_THROWS_AS((void)fit({}, kPrior, FitConfig{}), DataError);

  std::vector<ConsumptionPath> c = corpus(4, 50);
  PlanSpec other = kPlan;
  other.price = 0.7;
  std::vector<ConsumptionPath> mixed =
      simulate_corpus(kBase, kPrior, other, 2, 51);
  c.insert(c.end(), mixed.begin(), mixed.end());
  CHECK_THROWS_AS((void)fit(c, kPrior, FitConfig{}), DataError);
}

TEST_CASE("fit configuration validation") {
  FitConfig cfg;
  cfg.lambda = -0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = FitConfig{};
  cfg.grad_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = FitConfig{};
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("fit results serialize to complete JSON") {
  std::vector<ConsumptionPath> c = corpus(30, 60);
  FitResult r = fit(c, kPrior, FitConfig{});
  nlohmann::json j = nlohmann::json::parse(fit_result_to_json(r));
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    CHECK(j["raw"].contains(raw_param_name(k)));
    CHECK(j["theta"].contains(feature_name(k)));
    CHECK(j["identified"].contains(raw_param_name(k)));
  }
  CHECK(j["converged"].get<bool>() == r.converged);
  CHECK(j["grad_norm"].get<double>() == r.grad_norm);
  CHECK(j["price"].get<double>() == kPlan.price);
  CHECK(j["nll_history"].size() == r.nll_history.size());

  // A no-overage corpus serializes its price as the string "inf".
  PlanSpec cap = kPlan;
  cap.price = kInfinitePrice;
  std::vector<ConsumptionPath> capped =
      simulate_corpus(kBase, kPrior, cap, 30, 61);
  FitResult rc = fit(capped, kPrior, FitConfig{});
  nlohmann::json jc = nlohmann::json::parse(fit_result_to_json(rc));
  CHECK(jc["price"].get<std::string>() == "inf");
}
