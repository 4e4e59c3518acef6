// Random-feature pipeline timings: spectral sampling, feature evaluation,
// and continuous Thompson draws (single and amortized batch).

#include <benchmark/benchmark.h>

#include "espbo/gp.hpp"
#include "espbo/rng.hpp"
#include "espbo/spectral.hpp"

using espbo::Box;
using espbo::History;
using espbo::Hyperparams;
using espbo::Rng;

namespace {

Hyperparams bench_hp(int dim) {
  return Hyperparams(Eigen::VectorXd::Constant(dim, 0.3), 1.0, 1e-4, 0.0);
}

History bench_history(int t, int dim) {
  History d(Box::unit(dim));
  Rng rng(11);
  for (int i = 0; i < t; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform();
    d.add(x, rng.uniform(-1.0, 1.0));
  }
  return d;
}

void sample_spectral_bench(benchmark::State& state) {
  const int m = int(state.range(0));
  Hyperparams hp = bench_hp(2);
  for (auto _ : state) {
    Rng rng(12);
    espbo::FeatureMap fm = espbo::sample_spectral(hp, m, rng);
    benchmark::DoNotOptimize(fm.w.data());
  }
}

void features_batch_bench(benchmark::State& state) {
  const int m = int(state.range(0));
  Rng rng(13);
  espbo::FeatureMap fm = espbo::sample_spectral(bench_hp(2), m, rng);
  Eigen::MatrixXd pts(500, 2);
  for (int i = 0; i < pts.size(); ++i) pts.data()[i] = rng.uniform();
  for (auto _ : state) {
    Eigen::MatrixXd phi = fm.features_batch(pts);
    benchmark::DoNotOptimize(phi.data());
  }
}

void thompson_draw_bench(benchmark::State& state) {
  const int m = int(state.range(0));
  History d = bench_history(32, 2);
  Hyperparams hp = bench_hp(2);
  Rng fm_rng(14);
  espbo::FeatureMap fm = espbo::sample_spectral(hp, m, fm_rng);
  espbo::LinearPosterior lp = espbo::fit_linear_posterior(fm, d, hp);
  for (auto _ : state) {
    Rng rng(15);
    Eigen::VectorXd x = espbo::thompson_minimizer(lp, Box::unit(2), rng);
    benchmark::DoNotOptimize(x.data());
  }
}

void thompson_batch_bench(benchmark::State& state) {
  const int count = int(state.range(0));
  History d = bench_history(32, 2);
  Hyperparams hp = bench_hp(2);
  Rng fm_rng(16);
  espbo::FeatureMap fm = espbo::sample_spectral(hp, 1000, fm_rng);
  espbo::LinearPosterior lp = espbo::fit_linear_posterior(fm, d, hp);
  Rng sweep_rng(17);
  espbo::ThompsonSampler sampler(lp, Box::unit(2), sweep_rng);
  for (auto _ : state) {
    Rng rng(18);
    Eigen::MatrixXd batch = sampler.draw_batch(count, rng, 1);
    benchmark::DoNotOptimize(batch.data());
  }
}

}  // namespace

BENCHMARK(sample_spectral_bench)->Arg(1000)->Arg(10000);
BENCHMARK(features_batch_bench)->Arg(1000)->Arg(10000)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(thompson_draw_bench)->Arg(200)->Arg(1000);
BENCHMARK(thompson_batch_bench)->Arg(50)->Arg(250)
    ->Unit(benchmark::kMillisecond);
