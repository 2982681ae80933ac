// One-day action distribution: splice-weight consistency, density
// continuity, CDF shape, exact sampling, and cycle simulation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "demandirl/model.hpp"
#include "demandirl/partition.hpp"
#include "demandirl/posterior.hpp"
#include "demandirl/rng.hpp"
#include "demandirl/truncnorm.hpp"
#include "doctest.h"

using namespace demandirl;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const RewardParams kBase{0.018, 0.00125, 0.0005, 0.1666, 0.0007};
const PriorParams kPrior{0.018, 0.00125, 0.0005, 0.1666, 0.05};
const PlanSpec kPlan{0.0, 600.0, 0.55, 30};

// Kolmogorov-Smirnov statistic of the positive draws against the CDF
// conditional on a > 0.  The atom at zero is discrete, so it gets its
// own binomial check; mixing it into a KS comparison would produce a
// spurious gap of size nu by construction.
double ks_statistic(std::vector<double> xs,
                    const PosteriorAction& post) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = (posterior_cdf(post, xs[i]) - post.nu) / (1.0 - post.nu);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}
}  // namespace

TEST_CASE("the two omega routes coincide") {
  Rng rng(555);
  for (double q : {1e-3, 10.0, 600.0, 1e4}) {
    for (int d : {1, 15, 30}) {
      for (int rep = 0; rep < 4; ++rep) {
        RewardParams th;
        th.mu = -0.05 + 0.1 * rng.uniform01();
        th.beta = 1e-4 + 0.004 * rng.uniform01();
        th.gamma = -0.002 + 0.004 * rng.uniform01();
        th.eta = 0.4 * rng.uniform01();
        th.kappa = -0.002 + 0.004 * rng.uniform01();
        PosteriorAction post = posterior_at(th, kPrior, q, d, 0.55);
        double via_continuity =
            posterior_splice_weight_continuity(th, kPrior, q, d, 0.55);
        CAPTURE(q);
        CAPTURE(d);
        CAPTURE(rep);
        if (post.omega == 0.0 || via_continuity == 0.0) {
          CHECK(post.omega == via_continuity);
        } else {
          CHECK(std::fabs(post.omega - via_continuity) <=
                1e-10 * via_continuity);
        }
      }
    }
  }
}

TEST_CASE("posterior density is continuous at the quota") {
  PosteriorAction post = posterior_at(kBase, kPrior, 600.0, 30, 0.55);
  REQUIRE(post.branch1.has_value());
  REQUIRE(post.branch2.has_value());
  double left = posterior_logpdf_positive(post, 600.0);  // branch-1 route
  double right = post.log_w2 + truncnorm_logpdf(*post.branch2, 600.0);
  CHECK(left == doctest::Approx(right).epsilon(1e-12));
}

TEST_CASE("CDF: atom at zero, quota split, completeness, monotonicity") {
  PosteriorAction post = posterior_at(kBase, kPrior, 600.0, 30, 0.55);
  CHECK(posterior_cdf(post, -1.0) == 0.0);
  CHECK(posterior_cdf(post, 0.0) == doctest::Approx(post.nu).epsilon(1e-13));
  // All of branch 1 lies at or below the quota.
  double at_q = posterior_cdf(post, 600.0);
  double want = post.nu + (1.0 - post.nu) * (1.0 - post.omega);
  CHECK(at_q == doctest::Approx(want).epsilon(1e-12));
  CHECK(posterior_cdf(post, 1e7) == doctest::Approx(1.0).epsilon(1e-12));
  double prev = -1.0;
  for (double x = 0.0; x <= 800.0; x += 7.3) {
    double f = posterior_cdf(post, x);
    CHECK(f >= prev - 1e-15);
    prev = f;
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  PosteriorAction post = posterior_at(kBase, kPrior, 300.0, 14, 0.55);
  Rng r1(2024), r2(2024);
  for (int i = 0; i < 200; ++i) {
    CHECK(sample_action(post, r1) == sample_action(post, r2));
  }
}

TEST_CASE("zero fraction and KS fidelity of the sampler") {
  struct Cfg {
    double q;
    int d;
    double price;
  };
  int cfg_index = 0;
  for (const Cfg& c : std::vector<Cfg>{
           {600.0, 30, 0.55}, {25.0, 5, 0.55}, {600.0, 30, kInf}}) {
    PosteriorAction post = posterior_at(kBase, kPrior, c.q, c.d, c.price);
    Rng rng(1000 + cfg_index++);
    const int n = 100000;
    std::vector<double> positive;
    positive.reserve(n);
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
      double a = sample_action(post, rng);
      CHECK(a >= 0.0);
      if (c.price == kInf) CHECK(a <= c.q);
      if (a == 0.0) {
        ++zeros;
      } else {
        positive.push_back(a);
      }
    }
    double phat = static_cast<double>(zeros) / n;
    double band = 3.0 * std::sqrt(post.nu * (1.0 - post.nu) / n);
    CAPTURE(c.q);
    CAPTURE(c.price);
    CHECK(std::fabs(phat - post.nu) <= band);
    // 1% Kolmogorov-Smirnov critical value (asymptotic).
    CHECK(ks_statistic(positive, post) <=
          1.62762 / std::sqrt(static_cast<double>(positive.size())));
  }
}

TEST_CASE("sampler moments match the analytic feature expectations") {
  // E[a] and E[a^2] from the partition module are an independent route
  // (completed-square algebra, no sampling); Monte Carlo must agree.
  FeatureScales unit;
  auto e = posterior_feature_expectation(kBase, kPrior, 600.0, 30, 0.55,
                                         unit);
  PosteriorAction post = posterior_at(kBase, kPrior, 600.0, 30, 0.55);
  Rng rng(31415);
  const int n = 20000;
  double s1 = 0.0;
  for (int i = 0; i < n; ++i) s1 += sample_action(post, rng);
  double mean = s1 / n;
  double sd = std::sqrt(std::max(e[kFeatQuad] - e[kFeatLin] * e[kFeatLin],
                                 1e-12));
  CHECK(std::fabs(mean - e[kFeatLin]) <= 4.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("degenerate states collapse to one branch") {
  PosteriorAction no_over = posterior_at(kBase, kPrior, 600.0, 30, kInf);
  CHECK(no_over.omega == 0.0);
  CHECK(!no_over.branch2.has_value());

  PosteriorAction spent = posterior_at(kBase, kPrior, 0.0, 10, 0.55);
  CHECK(spent.omega == 1.0);
  CHECK(!spent.branch1.has_value());
  Rng rng(8);
  for (int i = 0; i < 100; ++i) CHECK(sample_action(spent, rng) >= 0.0);
}

TEST_CASE("simulated cycles honor the bookkeeping contract") {
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    ConsumptionPath p = simulate_cycle(kBase, kPrior, kPlan, rng);
    CHECK(p.steps.size() == static_cast<std::size_t>(kPlan.cycle_days));
    CHECK_NOTHROW(validate_path(p));
  }
}

TEST_CASE("corpus simulation runs each cycle on its own substream") {
  const std::uint64_t seed = 123456;
  std::vector<ConsumptionPath> corpus =
      simulate_corpus(kBase, kPrior, kPlan, 5, seed);
  REQUIRE(corpus.size() == 5);
  for (int i = 0; i < 5; ++i) {
    Rng rng(Rng::substream(seed, static_cast<std::uint64_t>(i)));
    ConsumptionPath direct = simulate_cycle(kBase, kPrior, kPlan, rng);
    REQUIRE(direct.steps.size() == corpus[i].steps.size());
    for (std::size_t t = 0; t < direct.steps.size(); ++t) {
      CHECK(direct.steps[t].a == corpus[i].steps[t].a);
      CHECK(direct.steps[t].q == corpus[i].steps[t].q);
      CHECK(direct.steps[t].d == corpus[i].steps[t].d);
    }
  }
  // And the whole corpus reproduces from the same master seed.
  std::vector<ConsumptionPath> again =
      simulate_corpus(kBase, kPrior, kPlan, 5, seed);
  for (int i = 0; i < 5; ++i) {
    for (std::size_t t = 0; t < corpus[i].steps.size(); ++t) {
      CHECK(again[i].steps[t].a == corpus[i].steps[t].a);
    }
  }
}
