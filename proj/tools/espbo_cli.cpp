// Command line driver: runs portfolio Bayesian-optimization experiments,
// aggregates their trace files, and recomputes the benchmark minima with an
// independent grid oracle.
//
// Exit codes: 0 on success, 1 for configuration/usage errors, 2 for runtime
// failures (numerical errors, I/O failures, incomplete runs).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "espbo/errors.hpp"
#include "espbo/harness.hpp"
#include "espbo/testbed.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

int cmd_run(espbo::ExperimentConfig cfg, const std::string& method_str,
            const std::string& seeds_spec, const std::string& config_path) {
  cfg.method = espbo::method_from_string(method_str);
  cfg.seeds = espbo::parse_seed_spec(seeds_spec);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in)
      throw std::invalid_argument("cannot open config file: " + config_path);
    espbo::apply_config_stream(cfg, in, config_path);
  }
  if (cfg.objective.empty())
    throw std::invalid_argument(
        "run requires --objective (branin, hartmann3, or csv:<path>), "
        "either as a flag or as objective= in the config file");
  cfg.validate();
  espbo::Objective obj = espbo::make_objective(cfg.objective);

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" +
                             cfg.out_dir + "': " + ec.message());

  bool all_complete = true;
  for (std::uint64_t seed : cfg.seeds) {
    auto t0 = std::chrono::steady_clock::now();
    espbo::Trace trace = espbo::run_bo(cfg, seed, obj);
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    fs::path out_path =
        fs::path(cfg.out_dir) /
        espbo::trace_filename(trace.method_label, seed);
    std::ofstream out(out_path);
    if (out) espbo::write_trace_csv(trace, out);
    if (!out)
      throw std::runtime_error("failed to write trace file " +
                               out_path.string());

    std::cout << "objective=" << trace.objective
              << " method=" << trace.method_label << " seed=" << seed
              << " queries=" << trace.rows.size();
    if (!trace.rows.empty())
      std::cout << " best_true=" << fmt(trace.rows.back().best_true_value);
    if (trace.recommendation.size() > 0)
      std::cout << " rec_true=" << fmt(trace.recommendation_true_value);
    std::cout << " wall=" << fmt(wall, 4) << "s trace=" << out_path.string()
              << '\n';
    if (!trace.complete) {
      all_complete = false;
      std::cerr << "run failed (seed " << seed << "): " << trace.error
                << '\n';
    }
  }
  if (!all_complete) {
    std::cerr << "one or more runs did not complete\n";
    return 2;
  }
  return 0;
}

espbo::SummaryMetric metric_from_string(const std::string& s) {
  if (s == "auto") return espbo::SummaryMetric::Auto;
  if (s == "best-true") return espbo::SummaryMetric::BestTrue;
  if (s == "abs-error") return espbo::SummaryMetric::AbsError;
  if (s == "best-noisy") return espbo::SummaryMetric::BestNoisy;
  throw std::invalid_argument("unknown metric '" + s +
                              "' (auto, best-true, abs-error, best-noisy)");
}

int cmd_summarize(const std::string& dir, std::string out_dir,
                  const std::string& metric_str) {
  const espbo::SummaryMetric metric = metric_from_string(metric_str);
  if (!fs::is_directory(dir))
    throw std::invalid_argument("not a directory: " + dir);
  if (out_dir.empty()) out_dir = dir;

  // Group trace files by method label (everything before "_seed").
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".csv") continue;
    std::size_t pos = name.rfind("_seed");
    if (pos == std::string::npos) continue;
    groups[name.substr(0, pos)].push_back(entry.path().string());
  }
  if (groups.empty())
    throw std::invalid_argument("no trace files (*_seed*.csv) in " + dir);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + out_dir +
                             "': " + ec.message());

  for (auto& [label, files] : groups) {
    std::sort(files.begin(), files.end());
    std::vector<espbo::Trace> traces;
    traces.reserve(files.size());
    for (const auto& f : files) traces.push_back(espbo::read_trace_csv(f));
    std::vector<espbo::SummaryRow> rows = espbo::summarize(traces, metric);
    fs::path out_path = fs::path(out_dir) / ("summary_" + label + ".csv");
    std::ofstream out(out_path);
    if (out) espbo::write_summary_csv(rows, out);
    if (!out)
      throw std::runtime_error("failed to write summary file " +
                               out_path.string());
    std::cout << "method=" << label << " traces=" << traces.size()
              << " rows=" << rows.size() << " summary=" << out_path.string()
              << '\n';
  }
  return 0;
}

// Independent pattern-search polish used by the oracle below; deliberately
// avoids the library's own optimizer so the benchmark constants get checked
// by separate code.
Eigen::VectorXd polish(const espbo::Objective& obj, Eigen::VectorXd x,
                       double step) {
  double fx = obj(x);
  while (step > 1e-13) {
    bool improved = false;
    for (int j = 0; j < x.size(); ++j) {
      for (double dir : {1.0, -1.0}) {
        Eigen::VectorXd trial = x;
        trial[j] = std::clamp(trial[j] + dir * step, obj.bounds.lo[j],
                              obj.bounds.hi[j]);
        double ft = obj(trial);
        if (ft < fx) {
          fx = ft;
          x = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

void oracle_report(const espbo::Objective& obj, int grid_per_dim) {
  const int d = obj.dim();
  Eigen::VectorXd width = obj.bounds.width();
  Eigen::VectorXd spacing = width / (grid_per_dim - 1);

  long total = 1;
  for (int j = 0; j < d; ++j) total *= grid_per_dim;

  // Full grid scan, keeping every point within a margin of the running
  // minimum so separated basins (the 2-d benchmark has three) survive.
  std::vector<Eigen::VectorXd> near_best;
  std::vector<double> near_vals;
  double best = std::numeric_limits<double>::infinity();
  const double margin = 0.5;
  Eigen::VectorXd x(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int j = 0; j < d; ++j) {
      x[j] = obj.bounds.lo[j] + spacing[j] * (rem % grid_per_dim);
      rem /= grid_per_dim;
    }
    double v = obj(x);
    if (v < best) best = v;
    if (v < best + margin) {
      near_best.push_back(x);
      near_vals.push_back(v);
    }
  }

  // Cluster the survivors by distance and polish one representative each.
  std::vector<Eigen::VectorXd> minima;
  std::vector<double> min_vals;
  std::vector<int> order(near_best.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = (int)i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return near_vals[a] < near_vals[b]; });
  const double cluster_radius = 0.1 * width.norm();
  for (int i : order) {
    if (near_vals[i] > best + margin) continue;
    bool close = false;
    for (const auto& m : minima)
      if ((near_best[i] - m).norm() < cluster_radius) close = true;
    if (close) continue;
    Eigen::VectorXd xm = polish(obj, near_best[i], spacing.maxCoeff());
    double vm = obj(xm);
    bool dup = false;
    for (const auto& m : minima)
      if ((xm - m).norm() < 1e-4 * width.norm()) dup = true;
    if (dup) continue;
    if (vm < best + 1e-6) {
      minima.push_back(xm);
      min_vals.push_back(vm);
    }
  }

  double oracle_min = *std::min_element(min_vals.begin(), min_vals.end());
  std::cout << obj.name << ": oracle minimum " << fmt(oracle_min, 15) << '\n';
  for (std::size_t i = 0; i < minima.size(); ++i) {
    std::cout << "  minimizer (";
    for (int j = 0; j < d; ++j)
      std::cout << (j ? ", " : "") << fmt(minima[i][j], 10);
    std::cout << ") value " << fmt(min_vals[i], 15) << '\n';
  }
  if (obj.true_min) {
    double diff = std::abs(oracle_min - *obj.true_min);
    std::cout << "  tabulated " << fmt(*obj.true_min, 15) << "  |diff| "
              << fmt(diff, 3) << '\n';
  }
}

int cmd_bench_oracle() {
  oracle_report(espbo::make_branin(), 601);
  oracle_report(espbo::make_hartmann3(), 81);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio Bayesian optimization with entropy-search expert "
               "selection"};
  app.require_subcommand(1);

  espbo::ExperimentConfig cfg;
  cfg.objective.clear();  // the run subcommand demands an explicit objective
  std::string method_str = "esp";
  std::string seeds_spec = "0";
  std::string config_path;

  auto* run = app.add_subcommand(
      "run", "Run experiments and write one trace CSV per (method, seed)");
  run->add_option("--objective", cfg.objective,
                  "branin, hartmann3, or csv:<path>");
  run->add_option("--method", method_str,
                  "esp, hedge, random-portfolio, ei, pi, or thompson");
  run->add_option("--horizon", cfg.horizon, "queries per run");
  run->add_option("--seeds", seeds_spec, "seed list: '7', '0..4', or '1,5,9'");
  run->add_option("--n-random-experts", cfg.n_random_experts,
                  "extra uniform-random experts in the portfolio");
  run->add_option("--noise-sd", cfg.noise_sd,
                  "observation noise standard deviation");
  run->add_option("--out", cfg.out_dir, "output directory for trace files");
  run->add_option("--config", config_path,
                  "key=value file applied over the flags");
  run->add_option("--n-init", cfg.n_init, "initial uniform queries");
  run->add_option("--mcmc-samples", cfg.mcmc_samples,
                  "hyperparameter samples per refresh");
  run->add_option("--representers", cfg.representers,
                  "minimizer pool size for esp");
  run->add_option("--hallucinations", cfg.hallucinations,
                  "simulated outcomes per esp candidate");
  run->add_option("--joint-samples", cfg.joint_samples,
                  "joint posterior draws per esp outcome");
  run->add_option("--m-features", cfg.m_features,
                  "Fourier features for Thompson sampling");
  run->add_option("--eta", cfg.eta, "hedge softmax temperature");
  run->add_flag("--stratified,!--no-stratified", cfg.stratified,
                "stratify esp outcome draws");
  run->add_option("--threads", cfg.threads,
                  "worker threads (0 = up to ESP_OPT_THREADS / hardware)");
  run->add_flag("--recommend-at-end,!--no-recommend-at-end",
                cfg.recommend_at_end,
                "compute the posterior-mean recommendation after the run");

  std::string summarize_dir;
  std::string summarize_out;
  std::string summarize_metric = "auto";
  auto* summ = app.add_subcommand(
      "summarize", "Aggregate trace CSVs into per-method summary tables");
  summ->add_option("dir", summarize_dir, "directory containing trace files")
      ->required();
  summ->add_option("--out", summarize_out,
                   "output directory (default: trace directory)");
  summ->add_option("--metric", summarize_metric,
                   "auto, best-true, abs-error, or best-noisy");

  auto* oracle = app.add_subcommand(
      "bench-oracle",
      "Recompute benchmark minima with an independent grid oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage / config errors exit 1
  }

  try {
    if (run->parsed())
      return cmd_run(cfg, method_str, seeds_spec, config_path);
    if (summ->parsed())
      return cmd_summarize(summarize_dir, summarize_out, summarize_metric);
    if (oracle->parsed()) return cmd_bench_oracle();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
