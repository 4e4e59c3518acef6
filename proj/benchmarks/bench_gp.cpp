// Gaussian-process core timings: posterior factorization, pointwise
// prediction, marginal likelihood, and joint sampling at representer sets.

#include <benchmark/benchmark.h>

#include "espbo/gp.hpp"
#include "espbo/rng.hpp"

using espbo::Box;
using espbo::History;
using espbo::Hyperparams;
using espbo::Rng;

namespace {

History random_history(int t, int dim, std::uint64_t seed) {
  History d(Box::unit(dim));
  Rng rng(seed);
  for (int i = 0; i < t; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform();
    d.add(x, rng.uniform(-1.0, 1.0));
  }
  return d;
}

Hyperparams bench_hp(int dim) {
  return Hyperparams(Eigen::VectorXd::Constant(dim, 0.3), 1.0, 1e-4, 0.0);
}

void fit_posterior_bench(benchmark::State& state) {
  const int t = int(state.range(0));
  History d = random_history(t, 2, 1);
  Hyperparams hp = bench_hp(2);
  for (auto _ : state) {
    espbo::PosteriorState post(d, hp);
    benchmark::DoNotOptimize(post.alpha().data());
  }
}

void predict_bench(benchmark::State& state) {
  const int t = int(state.range(0));
  History d = random_history(t, 2, 2);
  espbo::PosteriorState post(d, bench_hp(2));
  Eigen::VectorXd x = Eigen::VectorXd::Constant(2, 0.4);
  for (auto _ : state) {
    auto [mean, var] = post.predict(x);
    benchmark::DoNotOptimize(mean);
    benchmark::DoNotOptimize(var);
  }
}

void log_marginal_bench(benchmark::State& state) {
  const int t = int(state.range(0));
  History d = random_history(t, 2, 3);
  Hyperparams hp = bench_hp(2);
  for (auto _ : state) {
    double lm = espbo::log_marginal(d, hp);
    benchmark::DoNotOptimize(lm);
  }
}

void sample_joint_bench(benchmark::State& state) {
  const int g = int(state.range(0));
  History d = random_history(32, 2, 4);
  espbo::PosteriorState post(d, bench_hp(2));
  Rng pts_rng(5);
  Eigen::MatrixXd z(g, 2);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = pts_rng.uniform();
  for (auto _ : state) {
    Rng rng(6);
    Eigen::MatrixXd draws = post.sample_joint(z, 1000, rng);
    benchmark::DoNotOptimize(draws.data());
  }
}

}  // namespace

BENCHMARK(fit_posterior_bench)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(predict_bench)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(log_marginal_bench)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(sample_joint_bench)->Arg(100)->Arg(500)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
