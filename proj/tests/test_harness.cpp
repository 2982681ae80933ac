// CSV exchange formats, config-file parsing, and the multi-threaded
// finite-sample estimator study.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "demandirl/config.hpp"
#include "demandirl/csv.hpp"
#include "demandirl/errors.hpp"
#include "demandirl/experiment.hpp"
#include "demandirl/model.hpp"
#include "demandirl/posterior.hpp"
#include "doctest.h"

using namespace demandirl;

namespace {
const RewardParams kBase{0.018, 0.00125, 0.0005, 0.1666, 0.0007};
const PriorParams kPrior{0.018, 0.00125, 0.0005, 0.1666, 0.05};
const PlanSpec kPlan{0.0, 600.0, 0.55, 30};

bool has_line(const DataError& e, int line_no) {
  return std::string(e.what()).find(" line " + std::to_string(line_no) +
                                    ":") != std::string::npos;
}

template <typename Fn>
void expect_data_error_at_line(Fn&& fn, int line_no) {
  try {
    fn();
    FAIL_CHECK("expected DataError at line " << line_no);
  } catch (const DataError& e) {
    CAPTURE(e.what());
    CHECK(has_line(e, line_no));
  }
}
}  // namespace

TEST_CASE("corpus CSV writes, re-reads bit-exactly, and re-writes bytes") {
  std::vector<ConsumptionPath> corpus =
      simulate_corpus(kBase, kPrior, kPlan, 10, 99);
  std::ostringstream first;
  write_corpus_csv(first, corpus);
  std::istringstream back(first.str());
  std::vector<ConsumptionPath> again =
      ingest_csv(back, kPlan.price, kPlan.fee);
  REQUIRE(again.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(again[i].plan.quota == corpus[i].plan.quota);
    CHECK(again[i].plan.cycle_days == corpus[i].plan.cycle_days);
    CHECK(again[i].plan.price == kPlan.price);
    REQUIRE(again[i].steps.size() == corpus[i].steps.size());
    for (std::size_t t = 0; t < corpus[i].steps.size(); ++t) {
      CHECK(again[i].steps[t].a == corpus[i].steps[t].a);
      CHECK(again[i].steps[t].q == corpus[i].steps[t].q);
      CHECK(again[i].steps[t].d == corpus[i].steps[t].d);
    }
  }
  std::ostringstream second;
  write_corpus_csv(second, again);
  CHECK(first.str() == second.str());
}

TEST_CASE("double formatting round-trips and spells out infinities") {
  for (double x : {0.1, 1.0 / 3.0, 1e300, 5e-324, 0.0, -271.25}) {
    // strtod, not stod: stod throws out_of_range on subnormals.
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
  CHECK(format_double(kInfinitePrice) == "inf");
  CHECK(format_double(-kInfinitePrice) == "-inf");
}

TEST_CASE("empty corpus files are accepted as empty corpora") {
  std::istringstream nothing("");
  CHECK(ingest_csv(nothing, 0.55, 0.0).empty());
  std::istringstream header_only("user_id,cycle_id,day,a,q,d\n");
  CHECK(ingest_csv(header_only, 0.55, 0.0).empty());
}

TEST_CASE("corpus ingestion names the offending physical line") {
  auto run = [](const std::string& text) {
    return [text]() {
      std::istringstream in(text);
      (void)ingest_csv(in, 0.55, 0.0);
    };
  };
  const std::string h = "user_id,cycle_id,day,a,q,d\n";

  // Bad header.
  expect_data_error_at_line(run("user,cycle,day,a,q,d\n"), 1);
  // Row with too few fields (line 2).
  expect_data_error_at_line(run(h + "0,0,0,5.0,600\n"), 2);
  // Non-numeric field (line 2).
  expect_data_error_at_line(run(h + "0,0,0,5.0,600,x\n"), 2);
  // Duplicate day: the second day-1 row sits on line 4.
  expect_data_error_at_line(
      run(h + "0,0,0,5,100,3\n0,0,1,5,95,2\n0,0,1,5,95,1\n"), 4);
  // Missing day 1: detected on the day-2 row, line 3.
  expect_data_error_at_line(run(h + "0,0,0,5,100,2\n0,0,2,5,95,1\n"), 3);
  // d fails to count down on line 4.
  expect_data_error_at_line(
      run(h + "0,0,0,5,100,3\n0,0,1,5,95,2\n0,0,2,5,90,2\n"), 4);
  // Quota does not follow (q - a)_+ on line 3.
  expect_data_error_at_line(run(h + "0,0,0,5,100,2\n0,0,1,3,96,1\n"), 3);
  // Negative consumption on line 2.
  expect_data_error_at_line(run(h + "0,0,0,-1,100,1\n"), 2);
}

TEST_CASE("plan menus read back with infinite prices intact") {
  std::istringstream in(
      "fee,quota,price,cycle_days\n"
      "10,600,0.55,30\n"
      "25,1200,inf,30\n"
      "0,100,0,7\n");
  std::vector<PlanSpec> menu = read_plans_csv(in);
  REQUIRE(menu.size() == 3);
  CHECK(menu[0].fee == 10.0);
  CHECK(menu[0].quota == 600.0);
  CHECK(menu[0].price == 0.55);
  CHECK(menu[0].cycle_days == 30);
  CHECK(menu[1].price == kInfinitePrice);
  CHECK(menu[2].price == 0.0);

  auto bad = [](const std::string& text) {
    return [text]() {
      std::istringstream s(text);
      (void)read_plans_csv(s);
    };
  };
  expect_data_error_at_line(bad("fee,quota,price\n"), 1);
  expect_data_error_at_line(
      bad("fee,quota,price,cycle_days\n10,600,0.55\n"), 2);
  // A negative price fails the plan validator, reported with its line.
  expect_data_error_at_line(
      bad("fee,quota,price,cycle_days\n10,600,-0.5,30\n"), 2);
}

namespace {
std::string config_text(const std::string& price) {
  return "# customer model\n"
         "mu = 0.018\nbeta = 0.00125\ngamma = 0.0005\neta = 0.1666\n"
         "kappa = 0.0007\n"
         "mu0 = 0.018\nbeta0 = 0.00125\ngamma0 = 0.0005\neta0 = 0.1666\n"
         "nu0_bar = 0.05\n"
         "fee = 10\nquota = 600\nprice = " +
         price + "\ncycle_days = 30\n";
}
}  // namespace

TEST_CASE("model configs parse, including no-overage plans") {
  std::istringstream in(config_text("0.55"));
  ModelConfig c = parse_model_config(in);
  CHECK(c.reward.mu == 0.018);
  CHECK(c.reward.beta == 0.00125);
  CHECK(c.reward.eta == 0.1666);
  CHECK(c.prior.nu0_bar == 0.05);
  CHECK(c.plan.quota == 600.0);
  CHECK(c.plan.price == 0.55);
  CHECK(c.plan.cycle_days == 30);

  std::istringstream capped(config_text("inf"));
  CHECK(parse_model_config(capped).plan.price == kInfinitePrice);
}

TEST_CASE("config errors carry the key and location") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    (void)parse_model_config(in);
  };
  auto expect_mentions = [&parse](const std::string& text,
                                  const std::string& needle) {
    try {
      parse(text);
      FAIL_CHECK("expected DataError mentioning '" << needle << "'");
    } catch (const DataError& e) {
      CAPTURE(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_mentions(config_text("0.55") + "bogus = 1\n",
                  "unknown key 'bogus'");
  expect_mentions(config_text("0.55") + "mu = 2\n", "duplicate key 'mu'");
  expect_mentions("mu = 0.018\n", "missing required keys");
  CHECK_THROWS_AS(parse(config_text("not_a_number")), DataError);
  // Range violations surface as data errors naming the stream.
  std::string bad_beta0 = config_text("0.55");
  bad_beta0.replace(bad_beta0.find("beta0 = 0.00125"), 15, "beta0 = -0.001");
  CHECK_THROWS_AS(parse(bad_beta0), DataError);
}

TEST_CASE("experiment configuration validation") {
  ExperimentConfig cfg;
  cfg.true_reward = kBase;
  cfg.prior = kPrior;
  cfg.plan = kPlan;
  cfg.n_months_list = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_months_list = {0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_months_list = {4};
  cfg.n_repeats = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_repeats = 2;
  cfg.n_threads = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_threads = 1;
  cfg.hist_bins = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("the estimator study is reproducible and thread-invariant") {
  ExperimentConfig cfg;
  cfg.n_months_list = {4, 8};
  cfg.n_repeats = 10;
  cfg.true_reward = kBase;
  cfg.prior = kPrior;
  cfg.plan = kPlan;
  cfg.master_seed = 2024;
  cfg.hist_bins = 8;
  cfg.n_threads = 1;
  std::vector<EstimatorStats> serial = run_finite_sample_experiment(cfg);
  cfg.n_threads = 3;
  std::vector<EstimatorStats> threaded = run_finite_sample_experiment(cfg);
  cfg.n_threads = 1;
  std::vector<EstimatorStats> rerun = run_finite_sample_experiment(cfg);

  auto stats_csv = [](const std::vector<EstimatorStats>& s) {
    std::ostringstream out;
    write_experiment_stats_csv(out, s);
    return out.str();
  };
  auto hist_csv = [](const std::vector<EstimatorStats>& s, std::size_t k) {
    std::ostringstream out;
    write_histogram_csv(out, s, k);
    return out.str();
  };
  CHECK(stats_csv(serial) == stats_csv(threaded));
  CHECK(stats_csv(serial) == stats_csv(rerun));
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    CHECK(hist_csv(serial, k) == hist_csv(threaded, k));
  }

  REQUIRE(serial.size() == 2);
  CHECK(serial[0].n_months == 4);
  CHECK(serial[1].n_months == 8);
  for (const EstimatorStats& es : serial) {
    CHECK(es.n_repeats == 10);
    CHECK(es.n_converged >= 1);
    CHECK(es.n_converged <= es.n_repeats);
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      const ParamStats& ps = es.params[k];
      REQUIRE(ps.hist.edges.size() == 9);
      REQUIRE(ps.hist.counts.size() == 8);
      int mass = std::accumulate(ps.hist.counts.begin(),
                                 ps.hist.counts.end(), 0);
      CHECK(mass == es.n_converged);  // converged estimates only
      double truth = 0.0;
      switch (k) {
        case kFeatLin: truth = kBase.mu; break;
        case kFeatQuad: truth = kBase.beta; break;
        case kFeatCross: truth = kBase.gamma; break;
        case kFeatOver: truth = kBase.eta; break;
        default: truth = kBase.kappa; break;
      }
      CHECK(std::fabs(ps.bias - (ps.mean - truth)) < 1e-15);
    }
  }
  // Bin edges are shared across history lengths per parameter.
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    CHECK(serial[0].params[k].hist.edges == serial[1].params[k].hist.edges);
  }

  // Header and row layout of the stats table.
  std::istringstream table(stats_csv(serial));
  std::string line;
  REQUIRE(std::getline(table, line));
  CHECK(line == "param,n_months,mean,std,bias,n_converged");
  int rows = 0;
  std::string first_data;
  while (std::getline(table, line)) {
    if (rows == 0) first_data = line;
    ++rows;
  }
  CHECK(rows == 10);  // five parameters, two history lengths each
  CHECK(first_data.rfind("mu,4,", 0) == 0);

  // Histogram table: one count column per history length.
  std::istringstream htable(hist_csv(serial, kFeatLin));
  REQUIRE(std::getline(htable, line));
  CHECK(line == "bin_lo,bin_hi,count_m4,count_m8");
  int hrows = 0;
  while (std::getline(htable, line)) ++hrows;
  CHECK(hrows == 8);
}

TEST_CASE("a single repeat is flagged degenerate with zero spread") {
  ExperimentConfig cfg;
  cfg.n_months_list = {4};
  cfg.n_repeats = 1;
  cfg.true_reward = kBase;
  cfg.prior = kPrior;
  cfg.plan = kPlan;
  cfg.master_seed = 7;
  std::vector<EstimatorStats> stats = run_finite_sample_experiment(cfg);
  REQUIRE(stats.size() == 1);
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    CHECK(stats[0].params[k].degenerate);
    CHECK(stats[0].params[k].stddev == 0.0);
  }
}
