#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "espbo/gp.hpp"
#include "espbo/testbed.hpp"

namespace espbo {

// Meta-policy (or single strategy) driving query selection.
enum class Method { Esp, Hedge, RandomPortfolio, Ei, Pi, Thompson };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

// Full description of an experiment. Methods esp, hedge, and
// random-portfolio run the three-strategy portfolio (expected improvement,
// probability of improvement, Thompson sampling) plus n_random_experts
// uniform-random experts; ei, pi, and thompson run that single strategy.
struct ExperimentConfig {
  std::string objective = "branin";  // "branin", "hartmann3", "csv:<path>"
  Method method = Method::Esp;
  int horizon = 100;
  int n_init = 2;  // uniform-random queries before model-based selection
  std::vector<std::uint64_t> seeds = {0};
  int n_random_experts = 0;
  double noise_sd = 1e-3;

  int mcmc_samples = 10;     // hyperparameter samples per refresh
  int representers = 500;    // minimizer pool size for ESP
  int hallucinations = 5;    // simulated outcomes per ESP candidate
  int joint_samples = 1000;  // joint draws per ESP outcome
  int m_features = 1000;     // Fourier features for Thompson strategies
  double eta = 1.0;          // Hedge softmax temperature
  bool stratified = true;    // quantile-stratified ESP outcomes
  int threads = 0;           // 0 = all allowed by ESP_OPT_THREADS / hardware
  bool recommend_at_end = true;
  std::string out_dir = ".";

  void validate() const;  // throws std::invalid_argument

  // Strategy names in expert order, e.g. {"ei", "pi", "thompson", "random"}.
  std::vector<std::string> portfolio_sources() const;

  // Tag used in trace filenames, e.g. "esp" or "esp-r2" with random experts.
  std::string method_label() const;
};

struct TraceRow {
  std::uint64_t seed = 0;
  int t = 0;  // 1-based query index
  Eigen::VectorXd x;
  double y = 0.0;   // observed (noisy) value
  int expert = -1;  // portfolio index that produced x; -1 for init queries
  double best_true_value = 0.0;  // min noiseless value queried so far
  // best_true_value minus the known true minimum; NaN when unknown.
  double abs_error = std::numeric_limits<double>::quiet_NaN();
  // Wall-clock duration of this iteration. Kept in memory for reporting but
  // not serialized, so trace files stay byte-identical across reruns.
  double wall_seconds = 0.0;
};

struct Trace {
  std::string objective;
  std::string method_label;
  std::uint64_t seed = 0;
  bool complete = true;
  std::string error;  // first failure, when incomplete
  std::vector<TraceRow> rows;
  Eigen::VectorXd recommendation;  // empty when not computed
  double recommendation_true_value =
      std::numeric_limits<double>::quiet_NaN();
};

// Posterior-mean minimizer averaged over the hyperparameter samples, found
// by the shared inner optimizer (deterministic: the sweep offset is fixed
// and every observed point seeds a refinement start).
Eigen::VectorXd recommend(const History& d,
                          const std::vector<Hyperparams>& hps,
                          const Box& box);

// One full optimization run for one seed. The overload taking an Objective
// lets callers supply custom (e.g. failing) black boxes; the other resolves
// cfg.objective. A run that throws mid-loop returns the rows collected so
// far with complete = false.
Trace run_bo(const ExperimentConfig& cfg, std::uint64_t seed);
Trace run_bo(const ExperimentConfig& cfg, std::uint64_t seed,
             const Objective& obj);

// Trace CSV: header then one row per query with floats at 17 significant
// digits, so equal runs serialize to equal bytes.
void write_trace_csv(const Trace& trace, std::ostream& out);
Trace read_trace_csv(const std::string& path);
std::string trace_filename(const std::string& method_label,
                           std::uint64_t seed);

// Cross-seed aggregation at each t.
struct SummaryRow {
  int t = 0;
  int n = 0;  // traces aggregated
  double mean = 0.0;
  double stderr_mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// What summarize aggregates per iteration. Auto picks absolute error when
// the objective's minimum is known (every row carries one) and the best
// noiseless value otherwise; BestNoisy tracks the running minimum of the
// observed y instead.
enum class SummaryMetric { Auto, BestTrue, AbsError, BestNoisy };

// Throws std::invalid_argument when traces disagree on horizon (every trace
// must cover the same t range).
std::vector<SummaryRow> summarize(const std::vector<Trace>& traces,
                                  SummaryMetric metric = SummaryMetric::Auto);
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       std::ostream& out);

// key=value overrides (one per line, '#' comments) applied on top of flags.
void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value);
void apply_config_stream(ExperimentConfig& cfg, std::istream& in,
                         const std::string& where);

// Seed list specs: "7", "0..4" (inclusive), or "1,5,9".
std::vector<std::uint64_t> parse_seed_spec(const std::string& spec);

}  // namespace espbo
