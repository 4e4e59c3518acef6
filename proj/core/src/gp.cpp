#include "espbo/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "espbo/errors.hpp"

namespace espbo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Squared scaled distances between the rows of a and b: entry (i, j) is
// sum_k ((a_ik - b_jk) / ls_k)^2, computed via the expansion
// |u|^2 + |v|^2 - 2 u.v so that large point sets hit a single GEMM.
Eigen::MatrixXd scaled_sqdist(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b,
                              const Eigen::VectorXd& ls) {
  Eigen::ArrayXd inv = ls.array().inverse();
  Eigen::MatrixXd as = (a.array().rowwise() * inv.transpose()).matrix();
  Eigen::MatrixXd bs = (b.array().rowwise() * inv.transpose()).matrix();
  Eigen::VectorXd an = as.rowwise().squaredNorm();
  Eigen::VectorXd bn = bs.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (as * bs.transpose());
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  return d2.cwiseMax(0.0);  // rounding can push tiny distances negative
}

Eigen::MatrixXd matern52_from_sqdist(const Eigen::MatrixXd& d2,
                                     double amplitude) {
  Eigen::ArrayXXd r = (5.0 * d2.array()).sqrt();
  return (amplitude * (-r).exp() * (1.0 + r + r.square() / 3.0)).matrix();
}

}  // namespace

Hyperparams::Hyperparams(Eigen::VectorXd ls, double amp, double noise,
                         double mu)
    : lengthscales(std::move(ls)), amplitude(amp), noise_var(noise), mean(mu) {
  validate();
}

void Hyperparams::validate() const {
  if (lengthscales.size() == 0)
    throw std::invalid_argument("Hyperparams: no lengthscales");
  if (!(lengthscales.array() > 0.0).all() ||
      !lengthscales.array().isFinite().all())
    throw std::invalid_argument("Hyperparams: lengthscales must be positive");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("Hyperparams: amplitude must be positive");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var))
    throw std::invalid_argument("Hyperparams: noise_var must be positive");
  if (!std::isfinite(mean))
    throw std::invalid_argument("Hyperparams: mean must be finite");
}

History::History(Box bounds) : bounds_(std::move(bounds)) {
  points_.resize(0, bounds_.dim());
}

void History::add(const Eigen::VectorXd& x, double y) {
  if (x.size() != bounds_.dim())
    throw std::invalid_argument("History::add: point dimension mismatch");
  if (!bounds_.contains(x))
    throw std::invalid_argument("History::add: point outside search box");
  if (!std::isfinite(y))
    throw std::invalid_argument("History::add: non-finite value");
  points_.conservativeResize(points_.rows() + 1, Eigen::NoChange);
  points_.row(points_.rows() - 1) = x.transpose();
  values_.push_back(y);
}

double History::best_value() const {
  if (values_.empty())
    throw std::invalid_argument("History::best_value: empty history");
  return values().minCoeff();
}

double kernel_matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const Hyperparams& hp) {
  if (x.size() != y.size() || x.size() != hp.lengthscales.size())
    throw std::invalid_argument("kernel_matern52: dimension mismatch");
  double d2 = ((x - y).array() / hp.lengthscales.array()).square().sum();
  double r = std::sqrt(5.0 * d2);
  return hp.amplitude * std::exp(-r) * (1.0 + r + r * r / 3.0);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b,
                              const Hyperparams& hp) {
  if (a.cols() != b.cols() || a.cols() != hp.lengthscales.size())
    throw std::invalid_argument("kernel_matrix: dimension mismatch");
  return matern52_from_sqdist(scaled_sqdist(a, b, hp.lengthscales),
                              hp.amplitude);
}

double cholesky_with_jitter(Eigen::MatrixXd& a, double scale) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("cholesky_with_jitter: matrix not square");
  if (a.rows() == 0) return 0.0;
  const Eigen::MatrixXd original = a;
  double jitter = 0.0;
  while (true) {
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(a);
    if (llt.info() == Eigen::Success) {
      a.triangularView<Eigen::StrictlyUpper>().setZero();
      return jitter;
    }
    jitter = jitter == 0.0 ? 1e-10 * scale : jitter * 10.0;
    if (jitter > 1e-4 * scale) {
      std::ostringstream msg;
      msg << "cholesky_with_jitter: factorization failed for a " << a.rows()
          << "x" << a.cols() << " matrix even with jitter " << 1e-4 * scale
          << " (scale " << scale << ", diagonal range ["
          << original.diagonal().minCoeff() << ", "
          << original.diagonal().maxCoeff() << "])";
      throw NumericalError(msg.str());
    }
    a = original;
    a.diagonal().array() += jitter;
  }
}

PosteriorState::PosteriorState(const History& d, const Hyperparams& hp)
    : hp_(hp) {
  hp_.validate();
  if (d.size() == 0) {
    x_.resize(0, hp_.dim());
    chol_.resize(0, 0);
    alpha_.resize(0);
    return;
  }
  if (d.dim() != hp_.dim())
    throw std::invalid_argument("PosteriorState: dimension mismatch");
  x_ = d.points();
  chol_ = kernel_matrix(x_, x_, hp_);
  chol_.diagonal().array() += hp_.noise_var;
  jitter_ = cholesky_with_jitter(chol_, hp_.amplitude);
  Eigen::VectorXd centered = (d.values().array() - hp_.mean).matrix();
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(centered);
  chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
}

std::pair<double, double> PosteriorState::predict(
    const Eigen::VectorXd& x) const {
  if (x.size() != hp_.dim())
    throw std::invalid_argument("PosteriorState::predict: dimension mismatch");
  if (size() == 0) return {hp_.mean, hp_.amplitude};
  Eigen::VectorXd k = kernel_matrix(x_, x.transpose(), hp_).col(0);
  double mean = hp_.mean + k.dot(alpha_);
  Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  double var = hp_.amplitude - v.squaredNorm();
  return {mean, std::max(0.0, var)};
}

void PosteriorState::predict_batch(const Eigen::MatrixXd& pts,
                                   Eigen::VectorXd& mean,
                                   Eigen::VectorXd& var) const {
  if (pts.cols() != hp_.dim())
    throw std::invalid_argument(
        "PosteriorState::predict_batch: dimension mismatch");
  const Eigen::Index n = pts.rows();
  if (size() == 0) {
    mean = Eigen::VectorXd::Constant(n, hp_.mean);
    var = Eigen::VectorXd::Constant(n, hp_.amplitude);
    return;
  }
  Eigen::MatrixXd kt = kernel_matrix(x_, pts, hp_);  // t x n
  mean = ((kt.transpose() * alpha_).array() + hp_.mean).matrix();
  chol_.triangularView<Eigen::Lower>().solveInPlace(kt);
  var = (hp_.amplitude - kt.colwise().squaredNorm().transpose().array())
            .max(0.0)
            .matrix();
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> PosteriorState::joint_posterior(
    const Eigen::MatrixXd& z) const {
  if (z.cols() != hp_.dim())
    throw std::invalid_argument(
        "PosteriorState::joint_posterior: dimension mismatch");
  Eigen::MatrixXd kzz = kernel_matrix(z, z, hp_);
  if (size() == 0)
    return {Eigen::VectorXd::Constant(z.rows(), hp_.mean), std::move(kzz)};
  Eigen::MatrixXd kt = kernel_matrix(x_, z, hp_);  // t x g
  Eigen::VectorXd mean = ((kt.transpose() * alpha_).array() + hp_.mean).matrix();
  chol_.triangularView<Eigen::Lower>().solveInPlace(kt);
  kzz.noalias() -= kt.transpose() * kt;
  kzz = 0.5 * (kzz + kzz.transpose()).eval();  // defend symmetry
  return {std::move(mean), std::move(kzz)};
}

Eigen::MatrixXd PosteriorState::sample_joint(const Eigen::MatrixXd& z, int s,
                                             Rng& rng) const {
  if (s <= 0)
    throw std::invalid_argument("PosteriorState::sample_joint: s <= 0");
  auto [mean, cov] = joint_posterior(z);
  cholesky_with_jitter(cov, hp_.amplitude);
  Eigen::MatrixXd draws(z.rows(), s);
  rng.fill_normal(draws);
  draws = (cov.triangularView<Eigen::Lower>() * draws).eval();
  draws.colwise() += mean;
  return draws.transpose();
}

PosteriorState fit_posterior(const History& d, const Hyperparams& hp) {
  return PosteriorState(d, hp);
}

double log_marginal(const History& d, const Hyperparams& hp) {
  hp.validate();
  const int n = d.size();
  if (n == 0) return 0.0;
  PosteriorState state(d, hp);
  Eigen::VectorXd centered = (d.values().array() - hp.mean).matrix();
  double quad = centered.dot(state.alpha());
  double logdet = state.chol().diagonal().array().log().sum();
  return -0.5 * quad - logdet - 0.5 * n * kLog2Pi;
}

}  // namespace espbo
