#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "espbo/box.hpp"
#include "espbo/rng.hpp"

namespace espbo {

// Kernel and observation-model parameters: ARD lengthscales (one per input
// dimension), signal amplitude (variance scale), observation-noise variance,
// and a constant prior mean.
struct Hyperparams {
  Eigen::VectorXd lengthscales;
  double amplitude = 1.0;   // signal variance nu^2
  double noise_var = 1e-6;  // sigma^2
  double mean = 0.0;        // constant prior mean mu0

  Hyperparams() = default;
  Hyperparams(Eigen::VectorXd ls, double amp, double noise, double mu);

  int dim() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;  // throws std::invalid_argument on bad values
};

// Observed evaluations (x_i, y_i) inside a fixed search box. Points are
// validated against the box as they are added.
class History {
 public:
  History() = default;
  explicit History(Box bounds);

  void add(const Eigen::VectorXd& x, double y);

  int size() const { return static_cast<int>(values_.size()); }
  int dim() const { return bounds_.dim(); }
  const Box& bounds() const { return bounds_; }

  // Points as an n x d matrix (row i = x_i).
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd values() const {
    return Eigen::Map<const Eigen::VectorXd>(values_.data(), values_.size());
  }
  double best_value() const;  // min over observed y; throws if empty

 private:
  Box bounds_;
  Eigen::MatrixXd points_;
  std::vector<double> values_;
};

// Matern-5/2 covariance with ARD lengthscales:
//   k(x, x') = amplitude * exp(-r) * (1 + r + r^2/3),
//   r = sqrt(5 * sum_j ((x_j - x'_j) / lengthscale_j)^2).
double kernel_matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const Hyperparams& hp);

// Cross-covariance matrix between the rows of a (n x d) and b (m x d).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b,
                              const Hyperparams& hp);

// In-place lower Cholesky factorization with an escalating diagonal jitter
// ladder: starts at 1e-10 * scale and multiplies by 10 up to 1e-4 * scale.
// Returns the jitter that was applied (0 when none was needed). Throws
// NumericalError when the ladder is exhausted.
double cholesky_with_jitter(Eigen::MatrixXd& a, double scale);

// Gaussian-process posterior for a fixed hyperparameter setting, holding the
// Cholesky factor of K + noise_var * I and the precomputed weight vector
// alpha = (K + noise_var * I)^{-1} (y - mean).
class PosteriorState {
 public:
  PosteriorState(const History& d, const Hyperparams& hp);

  const Hyperparams& hyperparams() const { return hp_; }
  const Eigen::MatrixXd& train_points() const { return x_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  int size() const { return static_cast<int>(x_.rows()); }

  // Posterior mean and variance of the latent function at x. The variance is
  // clamped at zero (tiny negatives can appear through rounding).
  std::pair<double, double> predict(const Eigen::VectorXd& x) const;

  // Batched latent mean and variance at the rows of pts (n x d).
  void predict_batch(const Eigen::MatrixXd& pts, Eigen::VectorXd& mean,
                     Eigen::VectorXd& var) const;

  // Joint posterior mean vector and covariance matrix at the rows of z.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> joint_posterior(
      const Eigen::MatrixXd& z) const;

  // s joint samples of the latent function at the rows of z (g x d).
  // Returns an s x g matrix, one sample per row.
  Eigen::MatrixXd sample_joint(const Eigen::MatrixXd& z, int s,
                               Rng& rng) const;

 private:
  Hyperparams hp_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd chol_;   // lower factor of K + noise_var I (+ jitter)
  Eigen::VectorXd alpha_;  // (K + noise_var I)^{-1} (y - mean)
  double jitter_ = 0.0;
};

PosteriorState fit_posterior(const History& d, const Hyperparams& hp);

// Log marginal likelihood log p(y | X, hp) under the constant-mean GP with
// Gaussian observation noise. Returns 0 for an empty history.
double log_marginal(const History& d, const Hyperparams& hp);

}  // namespace espbo
