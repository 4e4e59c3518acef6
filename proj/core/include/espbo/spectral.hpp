#pragma once

#include <Eigen/Dense>

#include "espbo/gp.hpp"
#include "espbo/inner_opt.hpp"

namespace espbo {

// Random Fourier feature map for the Matern-5/2 kernel:
//   phi(x) = sqrt(2 * amplitude / m) * cos(W x + b),
// where the rows of W are drawn from the kernel's spectral density (a
// multivariate Student-t with 5 degrees of freedom, scaled by the inverse
// lengthscales) and b is uniform on [0, 2*pi). In expectation over (W, b),
// phi(x).phi(x') equals the kernel.
struct FeatureMap {
  Eigen::MatrixXd w;  // m x d frequencies
  Eigen::VectorXd b;  // m phases
  double amplitude = 1.0;

  int n_features() const { return static_cast<int>(w.rows()); }
  int dim() const { return static_cast<int>(w.cols()); }

  // phi(x), an m-vector.
  Eigen::VectorXd features(const Eigen::VectorXd& x) const;

  // Feature matrix for the rows of pts (n x d): returns m x n.
  Eigen::MatrixXd features_batch(const Eigen::MatrixXd& pts) const;
};

FeatureMap sample_spectral(const Hyperparams& hp, int m, Rng& rng);

// Gaussian posterior over the feature weights theta of the Bayesian linear
// model y = phi(x).theta + noise. With no data the posterior is the prior
// N(0, I); otherwise
//   theta | D ~ N(A^{-1} Phi^T (y - mean), noise_var * A^{-1}),
//   A = Phi^T Phi + noise_var * I,
// stored through the Cholesky factor of A. Draws from this posterior give
// smooth global approximations of GP posterior samples.
class LinearPosterior {
 public:
  LinearPosterior(FeatureMap fm, const History& d, const Hyperparams& hp);

  const FeatureMap& feature_map() const { return fm_; }
  double mean_offset() const { return mean_offset_; }
  const Eigen::VectorXd& weight_mean() const { return weight_mean_; }

  Eigen::VectorXd sample_weights(Rng& rng) const;

  // Value of the sampled approximation at x for a given weight vector,
  // including the constant prior mean.
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const;

 private:
  FeatureMap fm_;
  double mean_offset_ = 0.0;     // constant prior mean
  bool prior_only_ = false;      // no data: theta ~ N(0, I)
  double noise_sd_ = 0.0;        // sqrt(noise_var)
  Eigen::VectorXd weight_mean_;  // posterior mean of theta
  Eigen::MatrixXd chol_a_;       // lower factor of A
};

LinearPosterior fit_linear_posterior(FeatureMap fm, const History& d,
                                     const Hyperparams& hp);

// Draws theta from the posterior and minimizes phi(x).theta over the box
// with the shared inner optimizer. One call = one Thompson sample.
Eigen::VectorXd thompson_minimizer(const LinearPosterior& lp, const Box& box,
                                   Rng& rng, const InnerOptOptions& opts = {});

// Amortized Thompson sampler: precomputes the sweep grid and its feature
// matrix once so that repeated draws (e.g. many representer points for the
// same hyperparameter sample) only pay one GEMV plus the refinement.
class ThompsonSampler {
 public:
  ThompsonSampler(LinearPosterior lp, Box box, Rng& rng,
                  const InnerOptOptions& opts = {});

  Eigen::VectorXd draw(Rng& rng) const;

  // `count` draws at once: the sweep evaluations for all weight draws
  // collapse into one GEMM and the refinements can run on worker threads.
  // All randomness is consumed serially up front, so results do not depend
  // on the thread count. Returns count x d minimizers, one per row.
  Eigen::MatrixXd draw_batch(int count, Rng& rng, int threads = 1) const;

 private:
  LinearPosterior lp_;
  Box box_;
  InnerOptOptions opts_;
  Eigen::MatrixXd sweep_pts_;  // n x d
  Eigen::MatrixXd phi_sweep_;  // m x n
};

}  // namespace espbo
