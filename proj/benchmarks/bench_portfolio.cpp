// Portfolio selection timings: minimizer-distribution extraction,
// representer sampling, and the full entropy-search candidate scoring loop
// that dominates one optimizer iteration.

#include <benchmark/benchmark.h>

#include <vector>

#include "espbo/acquisition.hpp"
#include "espbo/gp.hpp"
#include "espbo/portfolio.hpp"
#include "espbo/rng.hpp"

using espbo::Box;
using espbo::Candidate;
using espbo::EspConfig;
using espbo::History;
using espbo::Hyperparams;
using espbo::Rng;

namespace {

History bench_history(int t, int dim) {
  History d(Box::unit(dim));
  Rng rng(21);
  for (int i = 0; i < t; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform();
    d.add(x, rng.uniform(-1.0, 1.0));
  }
  return d;
}

std::vector<Hyperparams> bench_hps(int dim, int count) {
  std::vector<Hyperparams> hps;
  Rng rng(22);
  for (int i = 0; i < count; ++i)
    hps.emplace_back(
        Eigen::VectorXd::Constant(dim, rng.uniform(0.2, 0.5)),
        rng.uniform(0.5, 1.5), 1e-4, 0.0);
  return hps;
}

std::vector<Candidate> bench_candidates(int k, int dim) {
  std::vector<Candidate> cands;
  Rng rng(23);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform();
    cands.push_back(Candidate{x, "x"});
  }
  return cands;
}

void empirical_pmin_bench(benchmark::State& state) {
  const int g = int(state.range(0));
  Rng rng(24);
  Eigen::MatrixXd samples(1000, g);
  rng.fill_normal(samples);
  for (auto _ : state) {
    Eigen::VectorXd p = espbo::empirical_pmin(samples);
    benchmark::DoNotOptimize(p.data());
  }
}

void sample_representers_bench(benchmark::State& state) {
  const int g = int(state.range(0));
  History d = bench_history(24, 2);
  std::vector<Hyperparams> hps = bench_hps(2, 10);
  for (auto _ : state) {
    Rng rng(25);
    espbo::RepresenterSet reps =
        espbo::sample_representers(d, hps, g, 1000, rng, 1);
    benchmark::DoNotOptimize(reps.points.data());
  }
}

// Candidate scoring with the pool size and per-outcome joint draws of the
// default configuration, three candidates, three hyperparameter samples.
void esp_select_bench(benchmark::State& state) {
  const int g = int(state.range(0));
  const int s = int(state.range(1));
  History d = bench_history(24, 2);
  std::vector<Hyperparams> hps = bench_hps(2, 3);
  std::vector<Candidate> cands = bench_candidates(3, 2);
  EspConfig cfg;
  cfg.representers = g;
  cfg.joint_samples = s;
  cfg.hallucinations = 5;
  cfg.m_features = 500;
  cfg.threads = 1;
  for (auto _ : state) {
    Rng rng(26);
    int pick = espbo::esp_select(cands, d, hps, cfg, rng);
    benchmark::DoNotOptimize(pick);
  }
}

void hedge_select_bench(benchmark::State& state) {
  espbo::HedgeState st;
  st.gains = Eigen::VectorXd::LinSpaced(12, -1.0, 1.0);
  Rng rng(27);
  for (auto _ : state) {
    int pick = espbo::hedge_select(st, rng);
    benchmark::DoNotOptimize(pick);
  }
}

}  // namespace

BENCHMARK(empirical_pmin_bench)->Arg(100)->Arg(500);
BENCHMARK(sample_representers_bench)->Arg(100)->Arg(500)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(esp_select_bench)
    ->Args({100, 250})
    ->Args({500, 1000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(hedge_select_bench);
