// Command-line interface: simulate consumption histories, fit the
// demand model to CSV corpora, run the finite-sample estimator study,
// and value / rank hypothetical plans.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "demandirl/config.hpp"
#include "demandirl/counterfactual.hpp"
#include "demandirl/csv.hpp"
#include "demandirl/errors.hpp"
#include "demandirl/experiment.hpp"
#include "demandirl/likelihood.hpp"
#include "demandirl/model.hpp"
#include "demandirl/posterior.hpp"

namespace {

using namespace demandirl;

// Stream target that is either stdout ("-") or an owned file.
struct OutTarget {
  std::ofstream file;
  bool to_stdout = false;
  std::ostream& stream() { return to_stdout ? std::cout : file; }
};

OutTarget open_out(const std::string& path) {
  OutTarget t;
  if (path == "-") {
    t.to_stdout = true;
    return t;
  }
  t.file.open(path);
  if (!t.file) throw DataError("cannot open '" + path + "' for writing");
  return t;
}

void finish_out(OutTarget& t, const std::string& path) {
  t.stream().flush();
  if (!t.to_stdout && !t.file) {
    throw DataError("failed while writing '" + path + "'");
  }
}

RegNorm parse_norm(const std::string& s) {
  return s == "l1" ? RegNorm::kL1 : RegNorm::kL2;
}

nlohmann::ordered_json plan_to_json(const PlanSpec& plan) {
  nlohmann::ordered_json j;
  j["fee"] = plan.fee;
  if (is_no_overage_price(plan.price)) {
    j["price"] = "inf";
  } else {
    j["price"] = plan.price;
  }
  j["quota"] = plan.quota;
  j["cycle_days"] = plan.cycle_days;
  return j;
}

struct FitFlags {
  double lambda = 0.0;
  std::string norm = "l2";
  double grad_tol = 1e-8;
  int max_iter = 500;

  FitConfig to_config() const {
    FitConfig fc;
    fc.lambda = lambda;
    fc.norm = parse_norm(norm);
    fc.grad_tol = grad_tol;
    fc.max_iter = max_iter;
    return fc;
  }
};

void add_fit_flags(CLI::App* cmd, FitFlags& flags) {
  cmd->add_option("--lambda", flags.lambda,
                  "Regularization weight (default 0: plain MLE)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--norm", flags.norm,
                  "Regularization norm: l1 or l2 (default l2)")
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--grad-tol", flags.grad_tol,
                  "Gradient sup-norm convergence threshold");
  cmd->add_option("--max-iter", flags.max_iter,
                  "Optimizer iteration cap");
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "Dynamic consumer demand model: simulation, maximum-likelihood "
      "fitting, finite-sample studies, and counterfactual plan valuation"};
  app.require_subcommand(1);

  // ---- simulate ----
  std::string sim_config, sim_out = "-";
  int sim_months = 1;
  std::uint64_t sim_seed = 0;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Simulate billing cycles and write a CSV corpus");
  sim->add_option("--config", sim_config, "Model config file")->required();
  sim->add_option("--months", sim_months, "Number of cycles to simulate")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Master random seed")->required();
  sim->add_option("--out", sim_out, "Output CSV path, or - for stdout");
  sim->callback([&]() {
    ModelConfig cfg = load_model_config(sim_config);
    std::vector<ConsumptionPath> corpus =
        simulate_corpus(cfg.reward, cfg.prior, cfg.plan, sim_months, sim_seed);
    OutTarget out = open_out(sim_out);
    write_corpus_csv(out.stream(), corpus);
    finish_out(out, sim_out);
  });

  // ---- fit ----
  std::string fit_config_path, fit_data, fit_out = "-";
  FitFlags fit_flags;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "Fit the model to a CSV corpus by maximum likelihood");
  fit_cmd->add_option("--config", fit_config_path,
                      "Model config file (supplies the default-behavior "
                      "parameters and the plan's price)")
      ->required();
  fit_cmd->add_option("--data", fit_data, "Corpus CSV path")->required();
  fit_cmd->add_option("--out", fit_out, "Output JSON path, or - for stdout");
  add_fit_flags(fit_cmd, fit_flags);
  fit_cmd->callback([&]() {
    ModelConfig cfg = load_model_config(fit_config_path);
    std::vector<ConsumptionPath> corpus =
        ingest_csv(fit_data, cfg.plan.price, cfg.plan.fee);
    FitResult res = fit(corpus, cfg.prior, fit_flags.to_config());
    OutTarget out = open_out(fit_out);
    out.stream() << fit_result_to_json(res) << "\n";
    finish_out(out, fit_out);
  });

  // ---- experiment ----
  std::string exp_config, exp_out_dir;
  std::vector<int> exp_months;
  int exp_repeats = 1, exp_threads = 1, exp_bins = 20;
  std::uint64_t exp_seed = 0;
  FitFlags exp_fit_flags;
  CLI::App* exp = app.add_subcommand(
      "experiment",
      "Finite-sample estimator study: simulate, fit, and aggregate");
  exp->add_option("--config", exp_config, "Model config file")->required();
  exp->add_option("--months", exp_months,
                  "History lengths, e.g. --months 10,100,1000")
      ->required()
      ->delimiter(',');
  exp->add_option("--repeats", exp_repeats, "Repeats per history length")
      ->required()
      ->check(CLI::PositiveNumber);
  exp->add_option("--seed", exp_seed, "Master random seed")->required();
  exp->add_option("--threads", exp_threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  exp->add_option("--bins", exp_bins, "Histogram bins per parameter")
      ->check(CLI::PositiveNumber);
  exp->add_option("--out-dir", exp_out_dir,
                  "Directory for stats.csv and hist_<param>.csv")
      ->required();
  add_fit_flags(exp, exp_fit_flags);
  exp->callback([&]() {
    ModelConfig cfg = load_model_config(exp_config);
    ExperimentConfig ec;
    ec.n_months_list = exp_months;
    ec.n_repeats = exp_repeats;
    ec.true_reward = cfg.reward;
    ec.prior = cfg.prior;
    ec.plan = cfg.plan;
    ec.master_seed = exp_seed;
    ec.n_threads = exp_threads;
    ec.hist_bins = exp_bins;
    ec.fit_config = exp_fit_flags.to_config();
    std::vector<EstimatorStats> stats = run_finite_sample_experiment(ec);

    std::filesystem::create_directories(exp_out_dir);
    std::string stats_path = exp_out_dir + "/stats.csv";
    {
      std::ofstream out(stats_path);
      if (!out) throw DataError("cannot open '" + stats_path + "'");
      write_experiment_stats_csv(out, stats);
    }
    std::cout << "wrote " << stats_path << "\n";
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      std::string hist_path =
          exp_out_dir + "/hist_" + raw_param_name(k) + ".csv";
      std::ofstream out(hist_path);
      if (!out) throw DataError("cannot open '" + hist_path + "'");
      write_histogram_csv(out, stats, k);
      std::cout << "wrote " << hist_path << "\n";
    }
  });

  // ---- evaluate-plans ----
  std::string ep_config, ep_plans, ep_out = "-";
  int ep_paths = 10000;
  std::uint64_t ep_seed = 0;
  CLI::App* ep = app.add_subcommand(
      "evaluate-plans",
      "Value a plan menu by simulation and rank it (common random "
      "numbers across plans)");
  ep->add_option("--config", ep_config, "Model config file")->required();
  ep->add_option("--plans", ep_plans, "Plan menu CSV")->required();
  ep->add_option("--paths", ep_paths, "Simulated cycles per plan")
      ->check(CLI::PositiveNumber);
  ep->add_option("--seed", ep_seed, "Master random seed")->required();
  ep->add_option("--out", ep_out, "Output CSV path, or - for stdout");
  ep->callback([&]() {
    ModelConfig cfg = load_model_config(ep_config);
    std::vector<PlanSpec> plans = read_plans_csv(ep_plans);
    if (plans.empty()) throw DataError("plan menu '" + ep_plans + "' is empty");
    std::vector<PlanValue> ranking =
        rank_plans(cfg.reward, cfg.prior, plans, ep_paths, ep_seed);
    OutTarget out = open_out(ep_out);
    out.stream() << "rank,fee,quota,price,cycle_days,total_utility,std_error,"
               "n_paths\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      const PlanValue& pv = ranking[i];
      out.stream() << (i + 1) << "," << format_double(pv.plan.fee) << ","
              << format_double(pv.plan.quota) << ","
              << format_double(pv.plan.price) << "," << pv.plan.cycle_days
              << "," << format_double(pv.total_utility) << ","
              << format_double(pv.std_error) << "," << pv.n_paths << "\n";
    }
    finish_out(out, ep_out);
  });

  // ---- bound-eta ----
  std::string be_config, be_plans, be_out = "-";
  int be_paths = 10000, be_chosen = 0;
  std::uint64_t be_seed = 0;
  CLI::App* be = app.add_subcommand(
      "bound-eta",
      "Bound the fee sensitivity eta from the customer's plan choice");
  be->add_option("--config", be_config, "Model config file")->required();
  be->add_option("--plans", be_plans,
                 "Plan menu CSV; the chosen plan is one of its rows")
      ->required();
  be->add_option("--chosen", be_chosen,
                 "0-based row index of the chosen plan (default 0)")
      ->check(CLI::NonNegativeNumber);
  be->add_option("--paths", be_paths, "Simulated cycles per plan")
      ->check(CLI::PositiveNumber);
  be->add_option("--seed", be_seed, "Master random seed")->required();
  be->add_option("--out", be_out, "Output JSON path, or - for stdout");
  be->callback([&]() {
    ModelConfig cfg = load_model_config(be_config);
    std::vector<PlanSpec> plans = read_plans_csv(be_plans);
    if (plans.empty()) throw DataError("plan menu '" + be_plans + "' is empty");
    if (be_chosen < 0 || static_cast<std::size_t>(be_chosen) >= plans.size()) {
      throw DataError("--chosen index " + std::to_string(be_chosen) +
                      " is out of range for a menu of " +
                      std::to_string(plans.size()) + " plans");
    }
    PlanSpec chosen = plans[static_cast<std::size_t>(be_chosen)];
    std::vector<PlanSpec> alternatives;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (i != static_cast<std::size_t>(be_chosen)) {
        alternatives.push_back(plans[i]);
      }
    }
    EtaBoundReport report = eta_bound_report(chosen, alternatives, cfg.reward,
                                             cfg.prior, be_paths, be_seed);
    nlohmann::ordered_json j;
    j["chosen"] = plan_to_json(chosen);
    j["n_paths"] = be_paths;
    j["chosen_expected_reward"] = report.chosen_expected_reward;
    if (std::isfinite(report.lower_bound)) {
      j["lower_bound"] = report.lower_bound;
    } else {
      j["lower_bound"] = "-inf";
    }
    if (std::isfinite(report.upper_bound)) {
      j["upper_bound"] = report.upper_bound;
    } else {
      j["upper_bound"] = "inf";
    }
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const EtaBoundTerm& term : report.terms) {
      nlohmann::ordered_json t;
      t["alternative"] = plan_to_json(term.alternative);
      t["expected_reward_diff"] = term.expected_reward_diff;
      t["fee_diff"] = term.fee_diff;
      t["ratio"] = term.ratio;
      t["bound_side"] = term.is_lower ? "lower" : "upper";
      terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
    j["warnings"] = report.warnings;
    OutTarget out = open_out(be_out);
    out.stream() << j.dump(2) << "\n";
    finish_out(out, be_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
