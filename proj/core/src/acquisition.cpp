#include "espbo/acquisition.hpp"

#include <cmath>
#include <stdexcept>

#include "espbo/stats.hpp"

namespace espbo {

double ei_value(double mean, double sd, double incumbent) {
  if (sd < 0.0 || !std::isfinite(sd))
    throw std::invalid_argument("ei_value: sd must be non-negative");
  double gap = incumbent - mean;
  if (sd == 0.0) return std::max(0.0, gap);
  double z = gap / sd;
  return gap * normal_cdf(z) + sd * normal_pdf(z);
}

double pi_value(double mean, double sd, double incumbent) {
  if (sd < 0.0 || !std::isfinite(sd))
    throw std::invalid_argument("pi_value: sd must be non-negative");
  if (sd == 0.0) return mean < incumbent ? 1.0 : 0.0;
  return normal_cdf((incumbent - mean) / sd);
}

Candidate propose_random(const Box& box, Rng& rng) {
  Eigen::VectorXd x(box.dim());
  for (int j = 0; j < box.dim(); ++j) x[j] = rng.uniform(box.lo[j], box.hi[j]);
  return {std::move(x), "random"};
}

Candidate propose_integrated(AcquisitionKind kind, const History& d,
                             const std::vector<Hyperparams>& hps,
                             const Box& box, Rng& rng,
                             const InnerOptOptions& opts) {
  const std::string source = kind == AcquisitionKind::Ei ? "ei" : "pi";
  if (d.size() == 0) {
    // Flat surface: every point is equally good, pick one uniformly.
    Candidate c = propose_random(box, rng);
    c.source = source;
    return c;
  }
  if (hps.empty())
    throw std::invalid_argument(
        "propose_integrated: no hyperparameter samples");
  std::vector<PosteriorState> states;
  states.reserve(hps.size());
  for (const auto& hp : hps) states.emplace_back(d, hp);
  const double incumbent = d.best_value();
  const double inv_m = 1.0 / static_cast<double>(states.size());

  // Negated so the shared minimizer maximizes the averaged acquisition.
  auto neg_acq = [&](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (const auto& st : states) {
      auto [mean, var] = st.predict(x);
      double sd = std::sqrt(var);
      total += kind == AcquisitionKind::Ei ? ei_value(mean, sd, incumbent)
                                           : pi_value(mean, sd, incumbent);
    }
    return -total * inv_m;
  };

  // Batch the sweep so the kernel solves hit GEMMs instead of per-point
  // back-substitutions.
  const int count = opts.sweep_per_dim * box.dim();
  Eigen::MatrixXd pts = sweep_points(box, count, rng);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd mean, var;
  for (const auto& st : states) {
    st.predict_batch(pts, mean, var);
    for (int i = 0; i < count; ++i) {
      double sd = std::sqrt(var[i]);
      vals[i] -= inv_m * (kind == AcquisitionKind::Ei
                              ? ei_value(mean[i], sd, incumbent)
                              : pi_value(mean[i], sd, incumbent));
    }
  }
  return {minimize_with_sweep(neg_acq, box, pts, vals, opts), source};
}

Candidate propose_thompson(const History& d, const Hyperparams& hp,
                           const Box& box, int m_features, Rng& rng,
                           const InnerOptOptions& opts) {
  FeatureMap fm = sample_spectral(hp, m_features, rng);
  LinearPosterior lp = fit_linear_posterior(std::move(fm), d, hp);
  return {thompson_minimizer(lp, box, rng, opts), "thompson"};
}

}  // namespace espbo
