#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "espbo/acquisition.hpp"
#include "espbo/gp.hpp"
#include "espbo/rng.hpp"

namespace espbo {

// Pool of likely-minimizer locations ("representer points") drawn by
// continuous Thompson sampling, with one block of draws per hyperparameter
// sample. The pmin distribution is measured over this pool.
struct RepresenterSet {
  Eigen::MatrixXd points;                    // g x d
  std::vector<std::pair<int, int>> blocks;   // per hp sample: (offset, count)
};

// Draws g representer points: g / hps.size() Thompson samples per
// hyperparameter sample (the remainder goes to the first block).
RepresenterSet sample_representers(const History& d,
                                   const std::vector<Hyperparams>& hps, int g,
                                   int m_features, Rng& rng, int threads = 1);

// Empirical minimizer distribution over an s x g joint-sample matrix: the
// fraction of rows whose minimum lands in each column, ties resolved to the
// lowest column index. Entries are multiples of 1/s and sum to one.
Eigen::VectorXd empirical_pmin(const Eigen::MatrixXd& samples);

// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const Eigen::VectorXd& p);

struct EspConfig {
  int representers = 500;    // size of the representer pool
  int hallucinations = 5;    // outcome values simulated per candidate
  int joint_samples = 1000;  // joint posterior draws per outcome
  int m_features = 1000;     // feature count for Thompson representers
  bool stratified = true;    // midpoint-quantile outcomes vs plain Monte Carlo
  int threads = 1;

  // Test hook: use these points instead of Thompson-sampled representers.
  std::optional<Eigen::MatrixXd> fixed_representers;
};

struct EspResult {
  int selected = 0;
  // Per-candidate utility: expected negative entropy of the minimizer
  // distribution after hallucinating that candidate's outcome, averaged
  // over hyperparameter samples and outcomes. Empty for the single-
  // candidate shortcut.
  Eigen::VectorXd utilities;
};

// Entropy-search portfolio selection: scores every candidate by how much
// observing it is expected to concentrate the minimizer distribution, and
// returns the index of the best candidate (ties to the lowest index).
//
// Randomness for each candidate's simulations is keyed on the candidate's
// coordinates (not its position), so permuting the list permutes the
// utilities, duplicated candidates score identically, and with one candidate
// the function returns 0 without any simulation.
EspResult esp_select_detailed(const std::vector<Candidate>& candidates,
                              const History& d,
                              const std::vector<Hyperparams>& hps,
                              const EspConfig& cfg, Rng& rng);

int esp_select(const std::vector<Candidate>& candidates, const History& d,
               const std::vector<Hyperparams>& hps, const EspConfig& cfg,
               Rng& rng);

// Gains-based softmax meta-policy (an exponential-weights baseline).
struct HedgeState {
  Eigen::VectorXd gains;
  double eta = 1.0;
};

// Samples expert k with probability proportional to exp(eta * gains[k]),
// computed with the max subtracted for overflow safety.
int hedge_select(const HedgeState& state, Rng& rng);

// Returns the state with rewards added onto the gains.
HedgeState hedge_update(HedgeState state, const Eigen::VectorXd& rewards);

// Uniform choice among k experts.
int random_portfolio_select(int k, Rng& rng);

}  // namespace espbo
