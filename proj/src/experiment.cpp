#include "demandirl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "demandirl/csv.hpp"
#include "demandirl/errors.hpp"
#include "demandirl/posterior.hpp"
#include "demandirl/rng.hpp"

namespace demandirl {

namespace {

using Estimate = std::array<double, kNumFeatures>;

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

}  // namespace

void ExperimentConfig::validate() const {
  if (n_months_list.empty()) {
    throw std::invalid_argument("n_months_list must not be empty");
  }
  for (int m : n_months_list) {
    if (m < 1) {
      throw std::invalid_argument("every n_months value must be >= 1");
    }
  }
  if (n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
  if (n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
  if (hist_bins < 1) throw std::invalid_argument("hist_bins must be >= 1");
  true_reward.validate();
  prior.validate();
  plan.validate();
  fit_config.validate();
}

std::vector<EstimatorStats> run_finite_sample_experiment(
    const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_groups = cfg.n_months_list.size();
  const std::size_t n_rep = static_cast<std::size_t>(cfg.n_repeats);
  const std::size_t n_jobs = n_groups * n_rep;

  // Every (history length, repeat) pair owns a fixed seed and a fixed
  // result slot, so the outcome does not depend on thread count or on
  // which worker picks which job.
  std::vector<std::optional<Estimate>> estimates(n_jobs);
  std::atomic<std::size_t> next_job{0};

  auto run_job = [&](std::size_t job) {
    std::size_t gi = job / n_rep;
    std::size_t rep = job % n_rep;
    std::uint64_t group_seed =
        Rng::substream(cfg.master_seed, static_cast<std::uint64_t>(gi));
    std::uint64_t seed =
        Rng::substream(group_seed, static_cast<std::uint64_t>(rep));
    try {
      std::vector<ConsumptionPath> corpus =
          simulate_corpus(cfg.true_reward, cfg.prior, cfg.plan,
                          cfg.n_months_list[gi], seed);
      FitResult res = fit(corpus, cfg.prior, cfg.fit_config);
      if (!res.converged) return;  // recorded as unconverged via the slot
      estimates[job] = Estimate{res.raw.mu, res.raw.beta, res.raw.gamma,
                                res.raw.eta, res.raw.kappa};
    } catch (const std::exception&) {
      // A failed fit counts as unconverged for this repeat; the slot
      // stays empty and n_converged reflects it.
    }
  };
  auto worker = [&]() {
    while (true) {
      std::size_t job = next_job.fetch_add(1);
      if (job >= n_jobs) break;
      run_job(job);
    }
  };

  std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.n_threads), n_jobs);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  const Estimate truth{cfg.true_reward.mu, cfg.true_reward.beta,
                       cfg.true_reward.gamma, cfg.true_reward.eta,
                       cfg.true_reward.kappa};

  // Converged estimates per group and parameter, sorted so aggregation
  // is independent of collection order.
  std::vector<std::array<std::vector<double>, kNumFeatures>> values(n_groups);
  std::vector<int> n_converged(n_groups, 0);
  for (std::size_t gi = 0; gi < n_groups; ++gi) {
    for (std::size_t rep = 0; rep < n_rep; ++rep) {
      const auto& est = estimates[gi * n_rep + rep];
      if (!est) continue;
      ++n_converged[gi];
      for (std::size_t k = 0; k < kNumFeatures; ++k) {
        values[gi][k].push_back((*est)[k]);
      }
    }
    for (auto& v : values[gi]) std::sort(v.begin(), v.end());
  }

  // Shared histogram edges per parameter: the combined range over every
  // history length, so the per-group histograms are comparable.
  std::array<std::vector<double>, kNumFeatures> edges;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
      if (values[gi][k].empty()) continue;
      lo = std::min(lo, values[gi][k].front());
      hi = std::max(hi, values[gi][k].back());
    }
    if (!(lo <= hi)) {  // no converged estimates anywhere
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    edges[k].resize(static_cast<std::size_t>(cfg.hist_bins) + 1);
    for (int b = 0; b <= cfg.hist_bins; ++b) {
      edges[k][static_cast<std::size_t>(b)] =
          lo + (hi - lo) * static_cast<double>(b) /
                   static_cast<double>(cfg.hist_bins);
    }
    // Pin the ends exactly.
    edges[k].front() = lo;
    edges[k].back() = hi;
  }

  std::vector<EstimatorStats> out(n_groups);
  for (std::size_t gi = 0; gi < n_groups; ++gi) {
    EstimatorStats& st = out[gi];
    st.n_months = cfg.n_months_list[gi];
    st.n_repeats = cfg.n_repeats;
    st.n_converged = n_converged[gi];
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      ParamStats& ps = st.params[k];
      const std::vector<double>& v = values[gi][k];
      double n = static_cast<double>(v.size());
      if (!v.empty()) {
        ps.mean = pairwise_sum(v) / n;
        if (v.size() >= 2) {
          std::vector<double> dev2(v.size());
          for (std::size_t i = 0; i < v.size(); ++i) {
            double d = v[i] - ps.mean;
            dev2[i] = d * d;
          }
          ps.stddev = std::sqrt(pairwise_sum(std::move(dev2)) / (n - 1.0));
        } else {
          ps.degenerate = true;
        }
        ps.bias = ps.mean - truth[k];
      } else {
        ps.degenerate = true;
      }
      ps.hist.edges = edges[k];
      ps.hist.counts.assign(static_cast<std::size_t>(cfg.hist_bins), 0);
      double lo = edges[k].front();
      double hi = edges[k].back();
      for (double x : v) {
        int b = static_cast<int>(std::floor((x - lo) / (hi - lo) *
                                            cfg.hist_bins));
        b = std::max(0, std::min(cfg.hist_bins - 1, b));
        ++ps.hist.counts[static_cast<std::size_t>(b)];
      }
    }
  }
  return out;
}

void write_experiment_stats_csv(std::ostream& out,
                                const std::vector<EstimatorStats>& stats) {
  out << "param,n_months,mean,std,bias,n_converged\n";
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    for (const EstimatorStats& st : stats) {
      const ParamStats& ps = st.params[k];
      out << raw_param_name(k) << "," << st.n_months << ","
          << format_double(ps.mean) << "," << format_double(ps.stddev) << ","
          << format_double(ps.bias) << "," << st.n_converged << "\n";
    }
  }
}

void write_histogram_csv(std::ostream& out,
                         const std::vector<EstimatorStats>& stats,
                         std::size_t param_index) {
  if (param_index >= kNumFeatures) {
    throw std::invalid_argument("param_index out of range");
  }
  out << "bin_lo,bin_hi";
  for (const EstimatorStats& st : stats) out << ",count_m" << st.n_months;
  out << "\n";
  if (stats.empty()) return;
  const Histogram& ref = stats.front().params[param_index].hist;
  for (std::size_t b = 0; b + 1 < ref.edges.size(); ++b) {
    out << format_double(ref.edges[b]) << ","
        << format_double(ref.edges[b + 1]);
    for (const EstimatorStats& st : stats) {
      out << "," << st.params[param_index].hist.counts[b];
    }
    out << "\n";
  }
}

}  // namespace demandirl
