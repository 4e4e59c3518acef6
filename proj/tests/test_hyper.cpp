#include <doctest.h>

#include <cmath>
#include <vector>

#include "espbo/hyper.hpp"
#include "oracles.hpp"

using espbo::Box;
using espbo::History;
using espbo::HyperChain;
using espbo::HyperPrior;
using espbo::Hyperparams;
using espbo::Rng;
using espbo::SliceOptions;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

// Independent log-density evaluation: log-normal terms written out with the
// explicit Jacobian, uniform mean term as -log(width).
double prior_logpdf_oracle(const HyperPrior& p, const Hyperparams& hp) {
  const double log_sqrt_2pi = 0.91893853320467274;
  auto ln = [&](double x, double loc, double scale) {
    const double z = (std::log(x) - loc) / scale;
    return -0.5 * z * z - std::log(scale) - log_sqrt_2pi - std::log(x);
  };
  double total = -std::log(p.mean_hi - p.mean_lo);
  for (int j = 0; j < p.dim(); ++j)
    total += ln(hp.lengthscales[j], p.ls_location[j], p.ls_scale);
  total += ln(hp.amplitude, p.amp_location, p.amp_scale);
  total += ln(hp.noise_var, p.noise_location, p.noise_scale);
  return total;
}

History sine_history(int n, std::uint64_t seed) {
  History d(Box::unit(1));
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    d.add(vec1(x), std::sin(6.0 * x) + 1e-3 * rng.normal());
  }
  return d;
}

}  // namespace

TEST_CASE("default prior scales with the box and the observed values") {
  Box box(Eigen::VectorXd::Zero(2), Eigen::Vector2d(4.0, 8.0));
  History d(box);
  d.add(Eigen::Vector2d(1.0, 2.0), -1.0);
  d.add(Eigen::Vector2d(2.0, 3.0), 3.0);
  d.add(Eigen::Vector2d(3.0, 5.0), 1.0);
  HyperPrior p = HyperPrior::defaults(box, d);

  CHECK(p.ls_location[0] == doctest::Approx(std::log(1.0)).epsilon(1e-14));
  CHECK(p.ls_location[1] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(p.noise_location == doctest::Approx(std::log(1e-2)).epsilon(1e-14));
  CHECK(p.noise_scale == 2.0);
  // Sample variance of {-1, 3, 1} is 4.
  CHECK(p.amp_location == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  // Mean range stretches one y-range past the extremes: [-5, 7].
  CHECK(p.mean_lo == doctest::Approx(-5.0));
  CHECK(p.mean_hi == doctest::Approx(7.0));
}

TEST_CASE("default prior falls back cleanly with scarce data") {
  Box box = Box::unit(1);
  History d(box);
  d.add(vec1(0.5), 2.0);  // one observation: no variance information
  HyperPrior p = HyperPrior::defaults(box, d);
  CHECK(p.amp_location == 0.0);
  CHECK(p.mean_lo == -1.0);
  CHECK(p.mean_hi == 1.0);
}

TEST_CASE("prior log density matches a hand-written evaluation") {
  HyperPrior p;
  p.ls_location = Eigen::Vector2d(std::log(0.5), std::log(0.25));
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    Hyperparams hp(
        Eigen::Vector2d(std::exp(rng.uniform(-2.0, 1.0)),
                        std::exp(rng.uniform(-2.0, 1.0))),
        std::exp(rng.uniform(-2.0, 1.0)), std::exp(rng.uniform(-6.0, 0.0)),
        rng.uniform(-1.0, 1.0));
    CHECK(p.log_density(hp) ==
          doctest::Approx(prior_logpdf_oracle(p, hp)).epsilon(1e-12));
  }
}

TEST_CASE("prior support excludes means outside the range") {
  HyperPrior p;
  p.ls_location = vec1(0.0);
  Hyperparams inside(vec1(1.0), 1.0, 1e-2, 0.5);
  Hyperparams outside(vec1(1.0), 1.0, 1e-2, 1.5);
  CHECK(std::isfinite(p.log_density(inside)));
  CHECK(p.log_density(outside) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("prior center sits at the location parameters") {
  HyperPrior p;
  p.ls_location = Eigen::Vector2d(std::log(0.5), std::log(2.0));
  p.amp_location = std::log(3.0);
  p.noise_location = std::log(1e-2);
  p.mean_lo = -2.0;
  p.mean_hi = 6.0;
  Hyperparams c = p.center();
  CHECK(c.lengthscales[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.lengthscales[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.amplitude == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(c.noise_var == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(c.mean == doctest::Approx(2.0));
}

TEST_CASE("log posterior is the marginal likelihood plus the prior") {
  History d = sine_history(5, 42);
  HyperPrior p = HyperPrior::defaults(Box::unit(1), d);
  Hyperparams hp(vec1(0.3), 1.2, 1e-3, 0.1);
  const double got = espbo::log_posterior(hp, d, p);
  const double want =
      oracle::gp_log_marginal(d.points(), d.values(), hp) +
      prior_logpdf_oracle(p, hp);
  CHECK(got == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("chains are deterministic per seed and sized as requested") {
  History d = sine_history(4, 43);
  HyperPrior p = HyperPrior::defaults(Box::unit(1), d);
  Rng a(44), b(44);
  HyperChain ca = espbo::sample_chain(d, p.center(), p, 6, a);
  HyperChain cb = espbo::sample_chain(d, p.center(), p, 6, b);
  REQUIRE(ca.samples.size() == 6);
  REQUIRE(cb.samples.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK((ca.samples[i].lengthscales.array() ==
           cb.samples[i].lengthscales.array())
              .all());
    CHECK(ca.samples[i].amplitude == cb.samples[i].amplitude);
    CHECK(ca.samples[i].noise_var == cb.samples[i].noise_var);
    CHECK(ca.samples[i].mean == cb.samples[i].mean);
  }
  CHECK(ca.diagnostics.target_evals > 0);
}

TEST_CASE("chain samples stay inside the prior support") {
  History d = sine_history(6, 45);
  HyperPrior p = HyperPrior::defaults(Box::unit(1), d);
  Rng rng(46);
  HyperChain chain = espbo::sample_chain(d, p.center(), p, 10, rng);
  for (const Hyperparams& hp : chain.samples) {
    CHECK((hp.lengthscales.array() > 0.0).all());
    CHECK(hp.amplitude > 0.0);
    CHECK(hp.noise_var > 0.0);
    CHECK(hp.mean >= p.mean_lo);
    CHECK(hp.mean <= p.mean_hi);
    CHECK(std::isfinite(espbo::log_posterior(hp, d, p)));
  }
}

TEST_CASE("empty-data chains recover the prior locations") {
  // With no observations the marginal likelihood is constant, so the chain
  // targets the prior; the log-scale sample means should sit near the prior
  // locations. The strict long-chain version lives in the acceptance suite.
  Box box = Box::unit(2);
  History d(box);
  HyperPrior p = HyperPrior::defaults(box, d);
  Rng rng(47);
  HyperChain chain = espbo::sample_chain(d, p.center(), p, 400, rng);
  REQUIRE(chain.samples.size() == 400);
  double ls0 = 0.0, amp = 0.0, noise = 0.0;
  for (const Hyperparams& hp : chain.samples) {
    ls0 += std::log(hp.lengthscales[0]);
    amp += std::log(hp.amplitude);
    noise += std::log(hp.noise_var);
  }
  ls0 /= 400.0;
  amp /= 400.0;
  noise /= 400.0;
  CHECK(std::abs(ls0 - p.ls_location[0]) < 0.25);
  CHECK(std::abs(amp - p.amp_location) < 0.25);
  // The noise prior has scale 2, so allow proportionally more drift.
  CHECK(std::abs(noise - p.noise_location) < 0.5);
}

TEST_CASE("posterior noise collapses on near-noiseless smooth data") {
  History d = sine_history(12, 48);
  HyperPrior p = HyperPrior::defaults(Box::unit(1), d);
  Rng rng(49);
  HyperChain chain = espbo::sample_chain(d, p.center(), p, 10, rng);
  double log_noise = 0.0;
  for (const Hyperparams& hp : chain.samples)
    log_noise += std::log(hp.noise_var);
  log_noise /= chain.samples.size();
  // The prior location is log(1e-2); twelve nearly noiseless points should
  // pull the posterior well below it.
  CHECK(log_noise < std::log(1e-3));
}

TEST_CASE("warm starts accept a shorter burn-in") {
  History d = sine_history(5, 50);
  HyperPrior p = HyperPrior::defaults(Box::unit(1), d);
  Rng rng(51);
  HyperChain cold = espbo::sample_chain(d, p.center(), p, 3, rng);
  SliceOptions warm;
  warm.burn_in = 5;
  HyperChain next =
      espbo::sample_chain(d, cold.samples.back(), p, 3, rng, warm);
  CHECK(next.samples.size() == 3);
  CHECK(std::isfinite(
      espbo::log_posterior(next.samples.back(), d, p)));
}
