#include "espbo/hyper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace espbo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

double normal_logpdf(double x, double loc, double scale) {
  double z = (x - loc) / scale;
  return -0.5 * z * z - std::log(scale) - kLogSqrt2Pi;
}

double lognormal_logpdf(double x, double loc, double scale) {
  if (!(x > 0.0)) return kNegInf;
  double lx = std::log(x);
  return normal_logpdf(lx, loc, scale) - lx;
}

// Transformed coordinates for the sampler: z = [log lengthscales..,
// log amplitude, log noise_var, mean]. In these coordinates the log-normal
// priors become plain normals (the Jacobian is absorbed exactly), so the
// chain targets the hyperparameter-space posterior.
Eigen::VectorXd to_z(const Hyperparams& hp) {
  const int d = hp.dim();
  Eigen::VectorXd z(d + 3);
  z.head(d) = hp.lengthscales.array().log().matrix();
  z[d] = std::log(hp.amplitude);
  z[d + 1] = std::log(hp.noise_var);
  z[d + 2] = hp.mean;
  return z;
}

bool from_z(const Eigen::VectorXd& z, int d, Hyperparams& hp) {
  // exp can overflow or underflow to zero for extreme coordinates; such
  // points are outside the representable support and get density -inf.
  if (!z.array().isFinite().all()) return false;
  hp.lengthscales = z.head(d).array().exp().matrix();
  hp.amplitude = std::exp(z[d]);
  hp.noise_var = std::exp(z[d + 1]);
  hp.mean = z[d + 2];
  return (hp.lengthscales.array() > 0.0).all() &&
         hp.lengthscales.array().isFinite().all() && hp.amplitude > 0.0 &&
         std::isfinite(hp.amplitude) && hp.noise_var > 0.0 &&
         std::isfinite(hp.noise_var);
}

}  // namespace

HyperPrior HyperPrior::defaults(const Box& box, const History& d) {
  HyperPrior prior;
  prior.ls_location = (0.25 * box.width().array()).log().matrix();
  prior.ls_scale = 1.0;
  prior.amp_scale = 1.0;
  prior.noise_location = std::log(1e-2);
  prior.noise_scale = 2.0;
  if (d.size() >= 2) {
    Eigen::VectorXd y = d.values();
    double mean = y.mean();
    double var = (y.array() - mean).square().sum() / (y.size() - 1);
    prior.amp_location = var > 0.0 ? std::log(var) : 0.0;
    double ylo = y.minCoeff(), yhi = y.maxCoeff();
    double range = yhi - ylo;
    if (range > 0.0) {
      prior.mean_lo = ylo - range;
      prior.mean_hi = yhi + range;
    } else {
      prior.mean_lo = ylo - 1.0;
      prior.mean_hi = ylo + 1.0;
    }
  } else {
    prior.amp_location = 0.0;
    prior.mean_lo = -1.0;
    prior.mean_hi = 1.0;
  }
  return prior;
}

double HyperPrior::log_density(const Hyperparams& hp) const {
  if (hp.dim() != dim())
    throw std::invalid_argument("HyperPrior::log_density: dimension mismatch");
  if (hp.mean < mean_lo || hp.mean > mean_hi) return kNegInf;
  double total = -std::log(mean_hi - mean_lo);
  for (int j = 0; j < dim(); ++j)
    total += lognormal_logpdf(hp.lengthscales[j], ls_location[j], ls_scale);
  total += lognormal_logpdf(hp.amplitude, amp_location, amp_scale);
  total += lognormal_logpdf(hp.noise_var, noise_location, noise_scale);
  return total;
}

Hyperparams HyperPrior::center() const {
  Hyperparams hp;
  hp.lengthscales = ls_location.array().exp().matrix();
  hp.amplitude = std::exp(amp_location);
  hp.noise_var = std::exp(noise_location);
  hp.mean = 0.5 * (mean_lo + mean_hi);
  return hp;
}

double log_posterior(const Hyperparams& hp, const History& d,
                     const HyperPrior& prior) {
  double lp = prior.log_density(hp);
  if (lp == kNegInf) return kNegInf;
  return lp + log_marginal(d, hp);
}

HyperChain sample_chain(const History& d, const Hyperparams& init,
                        const HyperPrior& prior, int m, Rng& rng,
                        const SliceOptions& opts) {
  if (m <= 0) throw std::invalid_argument("sample_chain: m <= 0");
  if (init.dim() != prior.dim())
    throw std::invalid_argument("sample_chain: dimension mismatch");
  if (d.size() > 0 && d.dim() != prior.dim())
    throw std::invalid_argument("sample_chain: history dimension mismatch");

  const int dim = prior.dim();
  const int n_coords = dim + 3;
  HyperChain chain;
  SliceDiagnostics& diag = chain.diagnostics;

  Hyperparams scratch = init;
  auto target = [&](const Eigen::VectorXd& z) {
    ++diag.target_evals;
    if (!from_z(z, dim, scratch)) return kNegInf;
    double lp = prior.log_density(scratch);
    if (lp == kNegInf) return kNegInf;
    // Change of variables to z: the +log x Jacobian of each positive
    // coordinate cancels the log-normal densities' -log x terms, so the
    // prior contribution is a plain normal in z. Without it the chain
    // targets a version shifted down by scale^2 in each log coordinate.
    return lp + log_marginal(d, scratch) + z.head(dim + 2).sum();
  };

  // Warm starts can carry a mean that falls outside the current (data-
  // dependent) uniform range; project it back inside so the chain has a
  // valid starting density.
  Hyperparams start = init;
  start.validate();
  double pad = 1e-9 * (prior.mean_hi - prior.mean_lo);
  start.mean =
      std::clamp(start.mean, prior.mean_lo + pad, prior.mean_hi - pad);

  Eigen::VectorXd z = to_z(start);
  double fz = target(z);
  if (fz == kNegInf)
    throw std::invalid_argument(
        "sample_chain: initial point has zero posterior density");

  chain.samples.reserve(m);
  const int total_sweeps = opts.burn_in + m * opts.thinning;
  for (int sweep = 1; sweep <= total_sweeps; ++sweep) {
    for (int c = 0; c < n_coords; ++c) {
      // Slice level: log f(z) minus an Exp(1) draw.
      double level = fz - (-std::log1p(-rng.uniform()));
      double lo = z[c] - rng.uniform() * opts.width;
      double hi = lo + opts.width;
      auto coord_target = [&](double v) {
        double old = z[c];
        z[c] = v;
        double out = target(z);
        z[c] = old;
        return out;
      };
      for (int e = 0; e < opts.max_stepout && coord_target(lo) > level; ++e) {
        lo -= opts.width;
        ++diag.expansions;
      }
      for (int e = 0; e < opts.max_stepout && coord_target(hi) > level; ++e) {
        hi += opts.width;
        ++diag.expansions;
      }
      bool accepted = false;
      for (int s = 0; s < opts.max_shrink; ++s) {
        double v = rng.uniform(lo, hi);
        double fv = coord_target(v);
        if (fv > level) {
          z[c] = v;
          fz = fv;
          accepted = true;
          break;
        }
        ++diag.shrink_rejects;
        (v < z[c] ? lo : hi) = v;
      }
      if (!accepted) ++diag.stuck_updates;
    }
    if (sweep > opts.burn_in &&
        (sweep - opts.burn_in) % opts.thinning == 0) {
      Hyperparams hp;
      from_z(z, dim, hp);
      chain.samples.push_back(std::move(hp));
    }
  }
  return chain;
}

}  // namespace espbo
