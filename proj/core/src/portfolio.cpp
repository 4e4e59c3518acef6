#include "espbo/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "espbo/parallel.hpp"
#include "espbo/spectral.hpp"
#include "espbo/stats.hpp"

namespace espbo {

RepresenterSet sample_representers(const History& d,
                                   const std::vector<Hyperparams>& hps, int g,
                                   int m_features, Rng& rng, int threads) {
  if (g <= 0) throw std::invalid_argument("sample_representers: g <= 0");
  if (hps.empty())
    throw std::invalid_argument("sample_representers: no hyperparameters");
  const int n_hps = static_cast<int>(hps.size());
  const int dim = hps.front().dim();
  const Box& box = d.bounds();
  if (box.dim() != dim)
    throw std::invalid_argument("sample_representers: dimension mismatch");

  RepresenterSet out;
  out.points.resize(g, dim);
  out.blocks.reserve(n_hps);
  const int base = g / n_hps;
  int offset = 0;
  for (int i = 0; i < n_hps; ++i) {
    int count = base + (i == 0 ? g % n_hps : 0);
    out.blocks.emplace_back(offset, count);
    offset += count;
  }

  const int workers = resolve_threads(threads);
  for (int i = 0; i < n_hps; ++i) {
    auto [start, count] = out.blocks[i];
    if (count == 0) continue;
    FeatureMap fm = sample_spectral(hps[i], m_features, rng);
    LinearPosterior lp = fit_linear_posterior(std::move(fm), d, hps[i]);
    ThompsonSampler sampler(std::move(lp), box, rng);
    out.points.middleRows(start, count) =
        sampler.draw_batch(count, rng, workers);
  }
  return out;
}

Eigen::VectorXd empirical_pmin(const Eigen::MatrixXd& samples) {
  const Eigen::Index s = samples.rows(), g = samples.cols();
  if (s == 0 || g == 0)
    throw std::invalid_argument("empirical_pmin: empty sample matrix");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(g);
  for (Eigen::Index r = 0; r < s; ++r) {
    int best = 0;
    double bv = samples(r, 0);
    for (Eigen::Index c = 1; c < g; ++c) {
      if (samples(r, c) < bv) {  // strict: ties keep the lowest index
        bv = samples(r, c);
        best = static_cast<int>(c);
      }
    }
    counts[best] += 1.0;
  }
  return counts / static_cast<double>(s);
}

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0)
      throw std::invalid_argument("entropy: negative probability");
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

namespace {

// Candidate points deduplicated by exact coordinates and sorted
// lexicographically. All per-candidate computation runs on this canonical
// set, which makes duplicate candidates score bit-identically and keeps the
// scores independent of the order the candidates were passed in.
struct UniquePoints {
  Eigen::MatrixXd points;     // u x d
  std::vector<int> index_of;  // candidate k -> row in points
};

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] < b[j]) return true;
    if (a[j] > b[j]) return false;
  }
  return false;
}

UniquePoints dedupe_candidates(const std::vector<Candidate>& candidates,
                               int dim) {
  std::vector<Eigen::VectorXd> sorted;
  sorted.reserve(candidates.size());
  for (const auto& c : candidates) sorted.push_back(c.point);
  std::sort(sorted.begin(), sorted.end(), lex_less);
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) { return a == b; }),
               sorted.end());
  UniquePoints out;
  out.points.resize(sorted.size(), dim);
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.points.row(i) = sorted[i].transpose();
  out.index_of.resize(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(),
                               candidates[k].point, lex_less);
    out.index_of[k] = static_cast<int>(it - sorted.begin());
  }
  return out;
}

// Per-candidate expected negative entropy under one hyperparameter sample,
// written into util_out (one entry per unique candidate).
//
// Sampling uses pathwise conditioning: the joint posterior over the
// representers and all candidate points is factorized once, and each
// hallucinated observation y at candidate x converts those base draws into
// draws from the updated posterior via
//   f(Z) | y  =  f(Z) + cov(f(Z), f(x)) / (var(f(x)) + noise) *
//                (y - f(x) - eps),   eps ~ N(0, noise).
// This costs one (g+u)-sized factorization per hyperparameter sample
// instead of one g-sized factorization per candidate, and the correction is
// a rank-1 shift per draw.
void hp_utilities(const History& d, const Hyperparams& hp,
                  const Eigen::MatrixXd& z, const Eigen::MatrixXd& xs,
                  const std::vector<std::uint64_t>& point_keys,
                  std::uint64_t hp_tag, std::uint64_t base_seed,
                  const EspConfig& cfg,
                  Eigen::Ref<Eigen::VectorXd> util_out) {
  const Eigen::Index g = z.rows();
  const Eigen::Index u = xs.rows();
  const int n_out = cfg.hallucinations;
  const int s = cfg.joint_samples;
  const double noise_sd = std::sqrt(hp.noise_var);

  PosteriorState state(d, hp);
  Eigen::MatrixXd za(g + u, z.cols());
  za << z, xs;
  auto [mean_a, cov_a] = state.joint_posterior(za);
  Eigen::MatrixXd cross = cov_a.block(0, g, g, u);  // cov(f(Z), f(x))
  Eigen::VectorXd var_x =
      cov_a.diagonal().tail(u).cwiseMax(0.0);        // var(f(x))
  cholesky_with_jitter(cov_a, hp.amplitude);

  Rng base_rng(base_seed);
  Eigen::MatrixXd dev(g + u, s);
  base_rng.fill_normal(dev);
  dev = (cov_a.triangularView<Eigen::Lower>() * dev).eval();
  // Base representer draws including their posterior mean; candidate rows
  // stay as pure deviations.
  Eigen::MatrixXd base = dev.topRows(g);
  base.colwise() += mean_a.head(g);

  Eigen::VectorXd eps(s), c(s), col(g), counts(g), outcomes(n_out);
  for (Eigen::Index q = 0; q < u; ++q) {
    Rng cand_rng(derive_seed(point_keys[q], hp_tag));
    const double mean_q = mean_a[g + q];
    const double s2 = var_x[q] + hp.noise_var;  // predictive variance of y
    const double sd = std::sqrt(s2);
    Eigen::VectorXd gain = cross.col(q) / s2;

    cand_rng.fill_normal(eps);
    eps *= noise_sd;
    if (cfg.stratified) {
      for (int n = 0; n < n_out; ++n)
        outcomes[n] = mean_q + sd * normal_quantile((n + 0.5) / n_out);
    } else {
      for (int n = 0; n < n_out; ++n)
        outcomes[n] = mean_q + sd * cand_rng.normal();
    }

    double total = 0.0;
    for (int n = 0; n < n_out; ++n) {
      // Per-draw correction coefficient (y - f(x) sample - noise).
      c = Eigen::VectorXd::Constant(s, outcomes[n] - mean_q) -
          dev.row(g + q).transpose() - eps;
      counts.setZero();
      for (int t = 0; t < s; ++t) {
        col = base.col(t) + c[t] * gain;
        int best = 0;
        double bv = col[0];
        for (Eigen::Index r = 1; r < g; ++r) {
          if (col[r] < bv) {
            bv = col[r];
            best = static_cast<int>(r);
          }
        }
        counts[best] += 1.0;
      }
      total -= entropy(counts / static_cast<double>(s));
    }
    util_out[q] = total / n_out;
  }
}

}  // namespace

EspResult esp_select_detailed(const std::vector<Candidate>& candidates,
                              const History& d,
                              const std::vector<Hyperparams>& hps,
                              const EspConfig& cfg, Rng& rng) {
  if (candidates.empty())
    throw std::invalid_argument("esp_select: no candidates");
  if (candidates.size() == 1) return {0, Eigen::VectorXd()};
  if (hps.empty())
    throw std::invalid_argument("esp_select: no hyperparameter samples");
  if (cfg.hallucinations <= 0 || cfg.joint_samples <= 0 ||
      cfg.representers <= 0)
    throw std::invalid_argument("esp_select: non-positive simulation sizes");
  const int dim = hps.front().dim();
  for (const auto& c : candidates)
    if (c.point.size() != dim)
      throw std::invalid_argument("esp_select: candidate dimension mismatch");

  const int n_cand = static_cast<int>(candidates.size());
  const int n_hps = static_cast<int>(hps.size());
  for (const auto& c : candidates)
    if (!c.point.allFinite())
      throw std::invalid_argument("esp_select: non-finite candidate point");

  // A fresh nonce per call keeps repeated calls independent; candidate
  // streams hang off it by point content so they ignore list order.
  const std::uint64_t nonce = rng.fork_seed();
  const std::uint64_t base_nonce = rng.fork_seed();

  Eigen::MatrixXd z;
  if (cfg.fixed_representers) {
    z = *cfg.fixed_representers;
    if (z.cols() != dim || z.rows() == 0)
      throw std::invalid_argument("esp_select: bad fixed representers");
  } else {
    z = sample_representers(d, hps, cfg.representers, cfg.m_features, rng,
                            cfg.threads)
            .points;
  }

  UniquePoints uniq = dedupe_candidates(candidates, dim);
  const Eigen::Index n_uniq = uniq.points.rows();
  std::vector<std::uint64_t> point_keys(n_uniq);
  Eigen::VectorXd flat(dim);
  for (Eigen::Index q = 0; q < n_uniq; ++q) {
    flat = uniq.points.row(q).transpose();
    point_keys[q] =
        hash_bytes(flat.data(), sizeof(double) * static_cast<std::size_t>(dim),
                   nonce);
  }

  Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(n_uniq, n_hps);
  const int workers = resolve_threads(cfg.threads);
  parallel_for(n_hps, workers, [&](int i) {
    hp_utilities(d, hps[i], z, uniq.points, point_keys,
                 static_cast<std::uint64_t>(i),
                 derive_seed(base_nonce, static_cast<std::uint64_t>(i)), cfg,
                 partial.col(i));
  });

  EspResult result;
  Eigen::VectorXd uniq_util = partial.rowwise().mean();
  result.utilities.resize(n_cand);
  for (int k = 0; k < n_cand; ++k)
    result.utilities[k] = uniq_util[uniq.index_of[k]];
  result.selected = 0;
  for (int k = 1; k < n_cand; ++k)
    if (result.utilities[k] > result.utilities[result.selected])
      result.selected = k;
  return result;
}

int esp_select(const std::vector<Candidate>& candidates, const History& d,
               const std::vector<Hyperparams>& hps, const EspConfig& cfg,
               Rng& rng) {
  return esp_select_detailed(candidates, d, hps, cfg, rng).selected;
}

int hedge_select(const HedgeState& state, Rng& rng) {
  const Eigen::Index k = state.gains.size();
  if (k == 0) throw std::invalid_argument("hedge_select: no experts");
  Eigen::ArrayXd logits = state.eta * state.gains.array();
  Eigen::ArrayXd weights = (logits - logits.maxCoeff()).exp();
  double total = weights.sum();
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(k - 1);  // guard against rounding at u ~ total
}

HedgeState hedge_update(HedgeState state, const Eigen::VectorXd& rewards) {
  if (rewards.size() != state.gains.size())
    throw std::invalid_argument("hedge_update: reward length mismatch");
  if (!rewards.array().isFinite().all())
    throw std::invalid_argument("hedge_update: non-finite reward");
  state.gains += rewards;
  return state;
}

int random_portfolio_select(int k, Rng& rng) {
  if (k <= 0) throw std::invalid_argument("random_portfolio_select: k <= 0");
  return rng.uniform_int(k);
}

}  // namespace espbo
