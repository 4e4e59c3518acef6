#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "espbo/errors.hpp"
#include "espbo/gp.hpp"
#include "oracles.hpp"

using espbo::Box;
using espbo::History;
using espbo::Hyperparams;
using espbo::PosteriorState;
using espbo::Rng;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Hyperparams unit_hp(int dim) {
  return Hyperparams(Eigen::VectorXd::Ones(dim), 1.0, 1e-6, 0.0);
}

// Random instance inside [0, 2]^dim with y values of modest scale.
History random_history(int dim, int n, Rng& rng) {
  History d(Box{Eigen::VectorXd::Zero(dim),
                Eigen::VectorXd::Constant(dim, 2.0)});
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform(0.0, 2.0);
    d.add(x, rng.uniform(-2.0, 2.0));
  }
  return d;
}

Hyperparams random_hp(int dim, Rng& rng) {
  Eigen::VectorXd ls(dim);
  for (int j = 0; j < dim; ++j) ls[j] = std::exp(rng.uniform(-1.5, 0.7));
  return Hyperparams(ls, std::exp(rng.uniform(-1.0, 1.0)),
                     std::exp(rng.uniform(-8.0, -2.0)),
                     rng.uniform(-1.0, 1.0));
}

}  // namespace

TEST_CASE("hyperparameter validation rejects non-positive scales") {
  CHECK_THROWS_AS(Hyperparams(vec1(0.0), 1.0, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Hyperparams(vec1(1.0), 0.0, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Hyperparams(vec1(1.0), 1.0, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Hyperparams(vec1(-1.0), 1.0, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_NOTHROW(Hyperparams(vec1(1.0), 2.0, 1e-4, -3.0));
}

TEST_CASE("history validates points against its box") {
  History d(Box::unit(2));
  d.add(Eigen::Vector2d(0.5, 0.5), 1.0);
  CHECK(d.size() == 1);
  CHECK(d.best_value() == 1.0);
  CHECK_THROWS_AS(d.add(Eigen::Vector2d(1.5, 0.5), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(d.add(Eigen::Vector3d(0.5, 0.5, 0.5), 0.0),
                  std::invalid_argument);
  d.add(Eigen::Vector2d(0.1, 0.9), -2.0);
  CHECK(d.best_value() == -2.0);
  CHECK(d.points().rows() == 2);

  History empty(Box::unit(1));
  CHECK_THROWS_AS(empty.best_value(), std::invalid_argument);
}

TEST_CASE("kernel value at zero distance is the amplitude") {
  Hyperparams hp(vec1(0.7), 2.5, 1e-6, 0.0);
  CHECK(espbo::kernel_matern52(vec1(0.3), vec1(0.3), hp) == 2.5);
}

TEST_CASE("kernel is exactly symmetric and decays to zero") {
  Rng rng(1);
  Hyperparams hp = random_hp(3, rng);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      a[j] = rng.uniform(-5.0, 5.0);
      b[j] = rng.uniform(-5.0, 5.0);
    }
    CHECK(espbo::kernel_matern52(a, b, hp) ==
          espbo::kernel_matern52(b, a, hp));
  }
  CHECK(espbo::kernel_matern52(vec1(0.0), vec1(1e6), unit_hp(1)) <
        1e-12);
}

TEST_CASE("kernel matches the closed-form value at unit distance") {
  // exp(-sqrt(5)) * (1 + sqrt(5) + 5/3) for l = 1, amplitude = 1.
  const double expected = 0.52399410883182031;
  CHECK(espbo::kernel_matern52(vec1(0.0), vec1(1.0), unit_hp(1)) ==
        doctest::Approx(expected).epsilon(1e-14));
  // ARD scaling: doubling the lengthscale equals halving the distance.
  Hyperparams wide(vec1(2.0), 1.0, 1e-6, 0.0);
  CHECK(espbo::kernel_matern52(vec1(0.0), vec1(1.0), wide) ==
        doctest::Approx(espbo::kernel_matern52(vec1(0.0), vec1(0.5),
                                               unit_hp(1)))
            .epsilon(1e-14));
}

TEST_CASE("kernel rejects dimension mismatches") {
  CHECK_THROWS_AS(
      espbo::kernel_matern52(vec1(0.0), Eigen::Vector2d(0, 0), unit_hp(1)),
      std::invalid_argument);
  CHECK_THROWS_AS(espbo::kernel_matern52(Eigen::Vector2d(0, 0),
                                         Eigen::Vector2d(0, 0), unit_hp(1)),
                  std::invalid_argument);
}

TEST_CASE("kernel matrix is positive definite with noise at desk scale") {
  Rng rng(2);
  Hyperparams hp = random_hp(2, rng);
  Eigen::MatrixXd pts(20, 2);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 2; ++j) pts(i, j) = rng.uniform(0.0, 2.0);
  Eigen::MatrixXd k = espbo::kernel_matrix(pts, pts, hp);
  k.diagonal().array() += hp.noise_var;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("cholesky_with_jitter reports the jitter it needed") {
  Eigen::MatrixXd ok = Eigen::MatrixXd::Identity(4, 4);
  CHECK(espbo::cholesky_with_jitter(ok, 1.0) == 0.0);

  // Exactly singular: rank-1 Gram matrix. A small jitter must rescue it.
  Eigen::VectorXd v(3);
  v << 1.0, 1.0, 1.0;
  Eigen::MatrixXd singular = v * v.transpose();
  Eigen::MatrixXd copy = singular;
  const double jitter = espbo::cholesky_with_jitter(copy, 1.0);
  CHECK(jitter > 0.0);
  CHECK(jitter <= 1e-4);
  Eigen::MatrixXd lower = copy.triangularView<Eigen::Lower>();
  Eigen::MatrixXd rebuilt = lower * lower.transpose();
  Eigen::MatrixXd target = singular;
  target.diagonal().array() += jitter;
  CHECK((rebuilt - target).cwiseAbs().maxCoeff() < 1e-10);

  // Indefinite matrices are beyond any jitter in the ladder.
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(espbo::cholesky_with_jitter(indefinite, 1.0),
                  espbo::NumericalError);
}

TEST_CASE("empty history recovers the prior") {
  History d(Box::unit(2));
  Hyperparams hp(Eigen::VectorXd::Ones(2), 3.0, 1e-4, 1.5);
  PosteriorState state(d, hp);
  auto [mean, var] = state.predict(Eigen::Vector2d(0.3, 0.8));
  CHECK(mean == 1.5);
  CHECK(var == 3.0);
  CHECK(espbo::log_marginal(d, hp) == 0.0);
}

TEST_CASE("near-noiseless posterior interpolates its observation") {
  History d(Box::unit(1));
  d.add(vec1(0.4), 0.7);
  Hyperparams hp(vec1(0.5), 1.0, 1e-12, 0.0);
  PosteriorState state(d, hp);
  auto [mean, var] = state.predict(vec1(0.4));
  CHECK(std::abs(mean - 0.7) < 1e-4);
  CHECK(var >= 0.0);
  CHECK(var < 1e-4);
}

TEST_CASE("two-observation posterior matches the dense-solve oracle") {
  History d(Box::unit(1));
  d.add(vec1(0.2), 0.5);
  d.add(vec1(0.9), -0.3);
  Hyperparams hp(vec1(0.4), 1.2, 1e-3, 0.1);
  PosteriorState state(d, hp);
  for (double q : {0.0, 0.2, 0.55, 0.9, 1.0}) {
    auto [mean, var] = state.predict(vec1(q));
    oracle::GpPrediction ref =
        oracle::gp_predict(d.points(), d.values(), hp, vec1(q));
    CHECK(mean == doctest::Approx(ref.mean).epsilon(1e-10));
    CHECK(var == doctest::Approx(std::max(ref.var, 0.0)).epsilon(1e-10));
  }
}

TEST_CASE("single-observation log marginal equals the scalar density") {
  History d(Box::unit(1));
  d.add(vec1(0.6), 1.3);
  Hyperparams hp(vec1(0.7), 0.8, 1e-2, 0.25);
  const double s2 = hp.amplitude + hp.noise_var;
  const double z = 1.3 - hp.mean;
  const double expected =
      -0.5 * (z * z / s2 + std::log(2.0 * std::acos(-1.0) * s2));
  CHECK(espbo::log_marginal(d, hp) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("posterior moments match the dense-inverse oracle on random instances") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = 1 + rng.uniform_int(3);
    const int n = rng.uniform_int(11);
    History d = random_history(dim, n, rng);
    Hyperparams hp = random_hp(dim, rng);
    PosteriorState state(d, hp);
    CHECK(std::abs(espbo::log_marginal(d, hp) -
                   oracle::gp_log_marginal(d.points(), d.values(), hp)) <
          1e-8);
    for (int q = 0; q < 5; ++q) {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x[j] = rng.uniform(0.0, 2.0);
      auto [mean, var] = state.predict(x);
      oracle::GpPrediction ref =
          oracle::gp_predict(d.points(), d.values(), hp, x);
      CHECK(std::abs(mean - ref.mean) < 1e-8);
      CHECK(std::abs(var - std::max(ref.var, 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("batched prediction equals pointwise prediction") {
  Rng rng(18);
  History d = random_history(2, 6, rng);
  Hyperparams hp = random_hp(2, rng);
  PosteriorState state(d, hp);
  Eigen::MatrixXd pts(9, 2);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 2; ++j) pts(i, j) = rng.uniform(0.0, 2.0);
  Eigen::VectorXd mean, var;
  state.predict_batch(pts, mean, var);
  for (int i = 0; i < 9; ++i) {
    auto [m, v] = state.predict(pts.row(i).transpose());
    CHECK(mean[i] == doctest::Approx(m).epsilon(1e-12));
    CHECK(var[i] == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("observing a point cannot increase posterior variance there") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    History d = random_history(2, 4, rng);
    Hyperparams hp = random_hp(2, rng);
    Eigen::VectorXd x(2);
    x << rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0);
    const double before = PosteriorState(d, hp).predict(x).second;
    d.add(x, rng.uniform(-1.0, 1.0));
    const double after = PosteriorState(d, hp).predict(x).second;
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("joint sampling is deterministic per seed") {
  Rng rng(20);
  History d = random_history(1, 3, rng);
  Hyperparams hp = random_hp(1, rng);
  PosteriorState state(d, hp);
  Eigen::MatrixXd z(4, 1);
  z << 0.1, 0.5, 1.2, 1.9;
  Rng r1(77), r2(77);
  CHECK((state.sample_joint(z, 16, r1).array() ==
         state.sample_joint(z, 16, r2).array())
            .all());
}

TEST_CASE("joint samples collapse onto a near-noiseless observation") {
  History d(Box::unit(1));
  d.add(vec1(0.5), 0.2);
  Hyperparams hp(vec1(0.5), 1.0, 1e-12, 0.0);
  PosteriorState state(d, hp);
  Eigen::MatrixXd z(1, 1);
  z << 0.5;
  Rng rng(21);
  Eigen::MatrixXd draws = state.sample_joint(z, 10000, rng);
  const double sd = std::sqrt(
      (draws.col(0).array() - draws.col(0).mean()).square().mean());
  CHECK(sd <= 1e-3);
}

TEST_CASE("prior joint samples center on the prior mean") {
  History d(Box::unit(1));
  Hyperparams hp(vec1(0.5), 1.0, 1e-6, 0.7);
  PosteriorState state(d, hp);
  Eigen::MatrixXd z(3, 1);
  z << 0.1, 0.5, 0.9;
  Rng rng(22);
  Eigen::MatrixXd draws = state.sample_joint(z, 10000, rng);
  const double se = 1.0 / std::sqrt(10000.0);  // prior sd is 1 here
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(draws.col(j).mean() - 0.7) < 4.0 * se);
}

TEST_CASE("joint sample covariance approaches the analytic covariance") {
  History d(Box::unit(1));
  d.add(vec1(0.25), 0.4);
  d.add(vec1(0.8), -0.1);
  Hyperparams hp(vec1(0.3), 1.0, 1e-2, 0.0);
  PosteriorState state(d, hp);
  Eigen::MatrixXd z(3, 1);
  z << 0.1, 0.5, 0.9;

  Eigen::VectorXd mean_ref;
  Eigen::MatrixXd cov_ref;
  oracle::gp_joint(d.points(), d.values(), hp, z, mean_ref, cov_ref);

  Rng rng(23);
  Eigen::MatrixXd draws = state.sample_joint(z, 100000, rng);
  Eigen::RowVectorXd mean_emp = draws.colwise().mean();
  Eigen::MatrixXd centered = draws.rowwise() - mean_emp;
  Eigen::MatrixXd cov_emp =
      centered.transpose() * centered / double(draws.rows() - 1);
  CHECK((cov_emp - cov_ref).norm() <= 0.05 * cov_ref.norm());
}
