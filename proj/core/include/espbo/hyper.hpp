#pragma once

#include <Eigen/Dense>
#include <vector>

#include "espbo/box.hpp"
#include "espbo/gp.hpp"
#include "espbo/rng.hpp"

namespace espbo {

// Prior over GP hyperparameters: independent log-normals on each
// lengthscale, the amplitude, and the noise variance (parameterized by
// location and scale of the underlying normal), plus a uniform prior on the
// constant mean. Defaults are data-scaled via `defaults`.
struct HyperPrior {
  Eigen::VectorXd ls_location;  // one per dimension
  double ls_scale = 1.0;
  double amp_location = 0.0;
  double amp_scale = 1.0;
  double noise_location = 0.0;
  double noise_scale = 2.0;
  double mean_lo = -1.0;
  double mean_hi = 1.0;

  // Data-scaled defaults: lengthscale locations at a quarter of each box
  // width, amplitude location at log var(y), mean range stretched one full
  // y-range beyond the observed values. With fewer than two observations the
  // y-dependent pieces fall back to fixed choices.
  static HyperPrior defaults(const Box& box, const History& d);

  int dim() const { return static_cast<int>(ls_location.size()); }

  // Log prior density in hyperparameter space; -inf outside the support.
  double log_density(const Hyperparams& hp) const;

  // The prior's location point, used to initialize cold chains.
  Hyperparams center() const;
};

// Log unnormalized posterior over hyperparameters:
// log_marginal(d, hp) + prior.log_density(hp). Returns -inf outside the
// prior support.
double log_posterior(const Hyperparams& hp, const History& d,
                     const HyperPrior& prior);

struct SliceOptions {
  double width = 1.0;    // initial bracket size in transformed coordinates
  int max_stepout = 8;   // step-out expansions per side
  int burn_in = 20;      // sweeps discarded before the first sample
  int thinning = 2;      // sweeps between retained samples
  int max_shrink = 1000; // shrink proposals before giving up on a coordinate
};

struct SliceDiagnostics {
  long long target_evals = 0;
  long long expansions = 0;
  long long shrink_rejects = 0;
  int stuck_updates = 0;  // coordinate updates that exhausted max_shrink
};

struct HyperChain {
  std::vector<Hyperparams> samples;
  SliceDiagnostics diagnostics;
};

// Coordinate-wise slice sampling of the hyperparameter posterior. Positive
// parameters are updated in log space (where their log-normal priors are
// plain normals), the mean in its natural units. Returns m samples taken
// every `thinning` sweeps after `burn_in` sweeps from `init`; callers
// warm-starting from a previous chain typically pass a shorter burn-in.
HyperChain sample_chain(const History& d, const Hyperparams& init,
                        const HyperPrior& prior, int m, Rng& rng,
                        const SliceOptions& opts = {});

}  // namespace espbo
