#include "espbo/spectral.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "espbo/parallel.hpp"

namespace espbo {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Eigen::VectorXd FeatureMap::features(const Eigen::VectorXd& x) const {
  if (x.size() != dim())
    throw std::invalid_argument("FeatureMap::features: dimension mismatch");
  const double scale = std::sqrt(2.0 * amplitude / n_features());
  return (scale * ((w * x + b).array().cos())).matrix();
}

Eigen::MatrixXd FeatureMap::features_batch(const Eigen::MatrixXd& pts) const {
  if (pts.cols() != dim())
    throw std::invalid_argument(
        "FeatureMap::features_batch: dimension mismatch");
  const double scale = std::sqrt(2.0 * amplitude / n_features());
  Eigen::MatrixXd phase = w * pts.transpose();  // m x n
  phase.colwise() += b;
  return (scale * phase.array().cos()).matrix();
}

FeatureMap sample_spectral(const Hyperparams& hp, int m, Rng& rng) {
  hp.validate();
  if (m <= 0) throw std::invalid_argument("sample_spectral: m <= 0");
  const int d = hp.dim();
  FeatureMap fm;
  fm.amplitude = hp.amplitude;
  fm.w.resize(m, d);
  fm.b.resize(m);
  rng.fill_normal(fm.w);
  // Divide each Gaussian row by sqrt(u/5), u ~ chi-squared(5), to obtain a
  // multivariate t with 5 degrees of freedom; the inverse lengthscales set
  // the per-axis scale of the spectral density.
  for (int i = 0; i < m; ++i) {
    double u = rng.chi_squared(5.0);
    fm.w.row(i) *= 1.0 / std::sqrt(u / 5.0);
  }
  fm.w.array().rowwise() /= hp.lengthscales.transpose().array();
  for (int i = 0; i < m; ++i) fm.b[i] = rng.uniform(0.0, kTwoPi);
  return fm;
}

LinearPosterior::LinearPosterior(FeatureMap fm, const History& d,
                                 const Hyperparams& hp)
    : fm_(std::move(fm)), mean_offset_(hp.mean) {
  hp.validate();
  if (fm_.dim() != hp.dim())
    throw std::invalid_argument("LinearPosterior: dimension mismatch");
  const int m = fm_.n_features();
  noise_sd_ = std::sqrt(hp.noise_var);
  if (d.size() == 0) {
    prior_only_ = true;
    weight_mean_ = Eigen::VectorXd::Zero(m);
    return;
  }
  Eigen::MatrixXd phi = fm_.features_batch(d.points());  // m x n
  chol_a_ = phi * phi.transpose();
  chol_a_.diagonal().array() += hp.noise_var;
  cholesky_with_jitter(chol_a_, chol_a_.diagonal().mean());
  Eigen::VectorXd rhs = phi * (d.values().array() - hp.mean).matrix();
  weight_mean_ = chol_a_.triangularView<Eigen::Lower>().solve(rhs);
  chol_a_.transpose().triangularView<Eigen::Upper>().solveInPlace(
      weight_mean_);
}

Eigen::VectorXd LinearPosterior::sample_weights(Rng& rng) const {
  const int m = fm_.n_features();
  Eigen::VectorXd z(m);
  rng.fill_normal(z);
  if (prior_only_) return z;
  // Covariance is noise_var * A^{-1}; a draw is mean + noise_sd * L^{-T} z.
  chol_a_.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
  return weight_mean_ + noise_sd_ * z;
}

double LinearPosterior::value(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& theta) const {
  return mean_offset_ + fm_.features(x).dot(theta);
}

LinearPosterior fit_linear_posterior(FeatureMap fm, const History& d,
                                     const Hyperparams& hp) {
  return LinearPosterior(std::move(fm), d, hp);
}

ThompsonSampler::ThompsonSampler(LinearPosterior lp, Box box, Rng& rng,
                                 const InnerOptOptions& opts)
    : lp_(std::move(lp)), box_(std::move(box)), opts_(opts) {
  if (lp_.feature_map().dim() != box_.dim())
    throw std::invalid_argument("ThompsonSampler: dimension mismatch");
  const int count = opts_.sweep_per_dim * box_.dim();
  sweep_pts_ = sweep_points(box_, count, rng);
  phi_sweep_ = lp_.feature_map().features_batch(sweep_pts_);
}

Eigen::VectorXd ThompsonSampler::draw(Rng& rng) const {
  Eigen::VectorXd theta = lp_.sample_weights(rng);
  Eigen::VectorXd vals = phi_sweep_.transpose() * theta;
  auto f = [&](const Eigen::VectorXd& x) {
    return lp_.feature_map().features(x).dot(theta);
  };
  return minimize_with_sweep(f, box_, sweep_pts_, vals, opts_);
}

Eigen::MatrixXd ThompsonSampler::draw_batch(int count, Rng& rng,
                                            int threads) const {
  if (count <= 0)
    throw std::invalid_argument("ThompsonSampler::draw_batch: count <= 0");
  const int m = lp_.feature_map().n_features();
  Eigen::MatrixXd thetas(m, count);
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd theta = lp_.sample_weights(rng);
    thetas.col(j) = theta;
  }
  Eigen::MatrixXd vals = phi_sweep_.transpose() * thetas;  // n x count
  Eigen::MatrixXd out(count, box_.dim());
  parallel_for(count, threads, [&](int j) {
    auto f = [&](const Eigen::VectorXd& x) {
      return lp_.feature_map().features(x).dot(thetas.col(j));
    };
    out.row(j) =
        minimize_with_sweep(f, box_, sweep_pts_, vals.col(j), opts_)
            .transpose();
  });
  return out;
}

Eigen::VectorXd thompson_minimizer(const LinearPosterior& lp, const Box& box,
                                   Rng& rng, const InnerOptOptions& opts) {
  ThompsonSampler sampler(lp, box, rng, opts);
  return sampler.draw(rng);
}

}  // namespace espbo
