#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "espbo/gp.hpp"
#include "espbo/inner_opt.hpp"
#include "espbo/spectral.hpp"

namespace espbo {

// Expected improvement below the incumbent for a Gaussian belief N(mean,
// sd^2): (inc - mean) * Phi(z) + sd * phi(z) with z = (inc - mean) / sd.
// At sd == 0 this degenerates to max(0, inc - mean).
double ei_value(double mean, double sd, double incumbent);

// Probability of improvement Phi((inc - mean) / sd); at sd == 0 it is the
// indicator of mean < incumbent.
double pi_value(double mean, double sd, double incumbent);

enum class AcquisitionKind { Ei, Pi };

// A proposed query point together with the name of the strategy that
// produced it ("ei", "pi", "thompson", or "random").
struct Candidate {
  Eigen::VectorXd point;
  std::string source;
};

// Maximizes the acquisition averaged over the hyperparameter samples, using
// the incumbent min(y) and the shared inner optimizer. With an empty history
// the acquisition surface is flat, so a uniform point is returned instead.
Candidate propose_integrated(AcquisitionKind kind, const History& d,
                             const std::vector<Hyperparams>& hps,
                             const Box& box, Rng& rng,
                             const InnerOptOptions& opts = {});

// One continuous-domain Thompson sample: draws a feature-space approximation
// of the posterior under a single hyperparameter setting (by convention the
// last MCMC sample) and minimizes it over the box.
Candidate propose_thompson(const History& d, const Hyperparams& hp,
                           const Box& box, int m_features, Rng& rng,
                           const InnerOptOptions& opts = {});

// Uniform random point in the box.
Candidate propose_random(const Box& box, Rng& rng);

}  // namespace espbo
