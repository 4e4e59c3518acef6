#include "espbo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "espbo/acquisition.hpp"
#include "espbo/hyper.hpp"
#include "espbo/inner_opt.hpp"
#include "espbo/parallel.hpp"
#include "espbo/portfolio.hpp"

namespace espbo {

namespace {

// Stream tags: every consumer of randomness gets its own child stream of the
// experiment seed, so adding or removing one consumer cannot shift another's
// draws.
constexpr std::uint64_t kInitTag = 0x01;
constexpr std::uint64_t kNoiseTag = 0x02;
constexpr std::uint64_t kMcmcTag = 0x03;
constexpr std::uint64_t kMetaTag = 0x04;
constexpr std::uint64_t kEspTag = 0x05;
constexpr std::uint64_t kStrategyTagBase = 0x100;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_full_double(const std::string& s, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

bool parse_full_int(const std::string& s, int& out) {
  std::size_t pos = 0;
  try {
    out = std::stoi(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("expected a non-negative integer, got '" + s +
                                "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("seed out of range: '" + s + "'");
  }
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool strategy_needs_model(const std::string& src) { return src != "random"; }

Candidate make_candidate(const std::string& src, const History& d,
                         const std::vector<Hyperparams>& hps, const Box& box,
                         Rng& rng, const ExperimentConfig& cfg) {
  if (src == "ei")
    return propose_integrated(AcquisitionKind::Ei, d, hps, box, rng);
  if (src == "pi")
    return propose_integrated(AcquisitionKind::Pi, d, hps, box, rng);
  if (src == "thompson")
    return propose_thompson(d, hps.back(), box, cfg.m_features, rng);
  if (src == "random") return propose_random(box, rng);
  throw std::invalid_argument("unknown strategy '" + src + "'");
}

}  // namespace

Method method_from_string(const std::string& s) {
  if (s == "esp") return Method::Esp;
  if (s == "hedge") return Method::Hedge;
  if (s == "random-portfolio") return Method::RandomPortfolio;
  if (s == "ei") return Method::Ei;
  if (s == "pi") return Method::Pi;
  if (s == "thompson") return Method::Thompson;
  throw std::invalid_argument(
      "unknown method '" + s +
      "' (expected esp, hedge, random-portfolio, ei, pi, or thompson)");
}

std::string method_to_string(Method m) {
  switch (m) {
    case Method::Esp: return "esp";
    case Method::Hedge: return "hedge";
    case Method::RandomPortfolio: return "random-portfolio";
    case Method::Ei: return "ei";
    case Method::Pi: return "pi";
    case Method::Thompson: return "thompson";
  }
  throw std::invalid_argument("method_to_string: bad enum value");
}

void ExperimentConfig::validate() const {
  if (objective.empty())
    throw std::invalid_argument("config: objective must be set");
  if (horizon < 1) throw std::invalid_argument("config: horizon < 1");
  if (n_init < 0) throw std::invalid_argument("config: n_init < 0");
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (n_random_experts < 0)
    throw std::invalid_argument("config: n_random_experts < 0");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
    throw std::invalid_argument("config: noise_sd must be >= 0");
  if (mcmc_samples < 1) throw std::invalid_argument("config: mcmc_samples < 1");
  if (representers < 1) throw std::invalid_argument("config: representers < 1");
  if (hallucinations < 1)
    throw std::invalid_argument("config: hallucinations < 1");
  if (joint_samples < 1)
    throw std::invalid_argument("config: joint_samples < 1");
  if (m_features < 1) throw std::invalid_argument("config: m_features < 1");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("config: eta must be positive");
  if (threads < 0) throw std::invalid_argument("config: threads < 0");
}

std::vector<std::string> ExperimentConfig::portfolio_sources() const {
  std::vector<std::string> sources;
  switch (method) {
    case Method::Ei: sources = {"ei"}; break;
    case Method::Pi: sources = {"pi"}; break;
    case Method::Thompson: sources = {"thompson"}; break;
    default: sources = {"ei", "pi", "thompson"}; break;
  }
  if (method == Method::Esp || method == Method::Hedge ||
      method == Method::RandomPortfolio) {
    for (int i = 0; i < n_random_experts; ++i) sources.push_back("random");
  }
  return sources;
}

std::string ExperimentConfig::method_label() const {
  std::string label = method_to_string(method);
  bool portfolio = method == Method::Esp || method == Method::Hedge ||
                   method == Method::RandomPortfolio;
  if (portfolio && n_random_experts > 0)
    label += "-r" + std::to_string(n_random_experts);
  return label;
}

Eigen::VectorXd recommend(const History& d,
                          const std::vector<Hyperparams>& hps,
                          const Box& box) {
  if (d.size() == 0)
    throw std::invalid_argument("recommend: empty history");
  if (hps.empty())
    throw std::invalid_argument("recommend: no hyperparameter samples");
  std::vector<PosteriorState> states;
  states.reserve(hps.size());
  for (const auto& hp : hps) states.emplace_back(d, hp);
  const double inv_m = 1.0 / static_cast<double>(states.size());

  auto mean_f = [&](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (const auto& st : states) total += st.predict(x).first;
    return total * inv_m;
  };

  InnerOptOptions opts;
  opts.extra_starts.reserve(d.size());
  for (int i = 0; i < d.size(); ++i)
    opts.extra_starts.push_back(d.points().row(i).transpose());

  // Fixed offset stream: the recommendation is a pure function of (d, hps).
  Rng sweep_rng(0);
  const int count = opts.sweep_per_dim * box.dim();
  Eigen::MatrixXd pts = sweep_points(box, count, sweep_rng);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd mean, var;
  for (const auto& st : states) {
    st.predict_batch(pts, mean, var);
    vals += inv_m * mean;
  }
  return minimize_with_sweep(mean_f, box, pts, vals, opts);
}

Trace run_bo(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_bo(cfg, seed, make_objective(cfg.objective));
}

Trace run_bo(const ExperimentConfig& cfg, std::uint64_t seed,
             const Objective& obj) {
  cfg.validate();
  const Box& box = obj.bounds;
  const int dim = box.dim();
  const std::vector<std::string> sources = cfg.portfolio_sources();
  const int n_experts = static_cast<int>(sources.size());
  const int workers = resolve_threads(cfg.threads);

  Trace trace;
  trace.objective = obj.name;
  trace.method_label = cfg.method_label();
  trace.seed = seed;

  Rng init_rng(derive_seed(seed, kInitTag));
  NoisyBlackBox black_box(obj, cfg.noise_sd, Rng(derive_seed(seed, kNoiseTag)));
  Rng mcmc_rng(derive_seed(seed, kMcmcTag));
  Rng meta_rng(derive_seed(seed, kMetaTag));
  Rng esp_rng(derive_seed(seed, kEspTag));
  std::vector<Rng> strategy_rngs;
  strategy_rngs.reserve(n_experts);
  for (int j = 0; j < n_experts; ++j)
    strategy_rngs.emplace_back(derive_seed(seed, kStrategyTagBase + j));

  EspConfig esp_cfg;
  esp_cfg.representers = cfg.representers;
  esp_cfg.hallucinations = cfg.hallucinations;
  esp_cfg.joint_samples = cfg.joint_samples;
  esp_cfg.m_features = cfg.m_features;
  esp_cfg.stratified = cfg.stratified;
  esp_cfg.threads = workers;

  History d(box);
  HedgeState hedge{Eigen::VectorXd::Zero(n_experts), cfg.eta};
  std::vector<Hyperparams> hps;
  bool warm = false;

  auto refresh_chain = [&]() {
    HyperPrior prior = HyperPrior::defaults(box, d);
    Hyperparams start = warm ? hps.back() : prior.center();
    SliceOptions opts;
    opts.burn_in = warm ? 5 : 20;
    HyperChain chain =
        sample_chain(d, start, prior, cfg.mcmc_samples, mcmc_rng, opts);
    hps = std::move(chain.samples);
    warm = true;
  };

  double best_true = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= cfg.horizon; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    TraceRow row;
    row.seed = seed;
    row.t = t;
    try {
      std::vector<Candidate> candidates;  // filled for esp / hedge rounds
      if (t <= cfg.n_init) {
        row.x.resize(dim);
        for (int j = 0; j < dim; ++j)
          row.x[j] = init_rng.uniform(box.lo[j], box.hi[j]);
        row.expert = -1;
      } else if (cfg.method == Method::RandomPortfolio) {
        // Selection ignores the candidates, so only the chosen expert's
        // proposal (and, when it needs one, the model refresh) is computed.
        row.expert = random_portfolio_select(n_experts, meta_rng);
        const std::string& src = sources[row.expert];
        if (strategy_needs_model(src)) refresh_chain();
        row.x = make_candidate(src, d, hps, box, strategy_rngs[row.expert],
                               cfg)
                    .point;
      } else {
        refresh_chain();
        candidates.reserve(n_experts);
        for (int j = 0; j < n_experts; ++j)
          candidates.push_back(
              make_candidate(sources[j], d, hps, box, strategy_rngs[j], cfg));
        switch (cfg.method) {
          case Method::Esp:
            row.expert = esp_select(candidates, d, hps, esp_cfg, esp_rng);
            break;
          case Method::Hedge:
            row.expert = hedge_select(hedge, meta_rng);
            break;
          default:
            row.expert = 0;
            break;
        }
        row.x = candidates[row.expert].point;
      }
      row.y = black_box(row.x);
      d.add(row.x, row.y);
      if (cfg.method == Method::Hedge && !candidates.empty()) {
        // Full-information reward: negative hyperparameter-averaged
        // posterior mean at every candidate under the data including the
        // new observation.
        std::vector<PosteriorState> states;
        states.reserve(hps.size());
        for (const auto& hp : hps) states.emplace_back(d, hp);
        Eigen::VectorXd rewards(n_experts);
        for (int j = 0; j < n_experts; ++j) {
          double total = 0.0;
          for (const auto& st : states)
            total += st.predict(candidates[j].point).first;
          rewards[j] = -total / static_cast<double>(states.size());
        }
        hedge = hedge_update(hedge, rewards);
      }
      best_true = std::min(best_true, obj.eval(row.x));
      row.best_true_value = best_true;
      if (obj.true_min) row.abs_error = best_true - *obj.true_min;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      trace.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      trace.complete = false;
      trace.error = "iteration " + std::to_string(t) + ": " + e.what();
      break;
    }
  }

  if (trace.complete && cfg.recommend_at_end && d.size() > 0) {
    try {
      if (hps.empty()) refresh_chain();
      trace.recommendation = recommend(d, hps, box);
      trace.recommendation_true_value = obj.eval(trace.recommendation);
    } catch (const std::exception& e) {
      trace.complete = false;
      trace.error = std::string("recommendation: ") + e.what();
    }
  }
  return trace;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  int dim = trace.rows.empty() ? 0 : static_cast<int>(trace.rows[0].x.size());
  out << "seed,t";
  for (int j = 0; j < dim; ++j) out << ",x" << j;
  out << ",y,expert,best_true_value,abs_error\n";
  for (const auto& row : trace.rows) {
    out << row.seed << ',' << row.t;
    for (int j = 0; j < dim; ++j) out << ',' << fmt17(row.x[j]);
    out << ',' << fmt17(row.y) << ',' << row.expert << ','
        << fmt17(row.best_true_value) << ',' << fmt17(row.abs_error) << '\n';
  }
}

std::string trace_filename(const std::string& method_label,
                           std::uint64_t seed) {
  return method_label + "_seed" + std::to_string(seed) + ".csv";
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path + ": empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  int dim = 0;
  while (dim + 2 < static_cast<int>(header.size()) &&
         header[dim + 2] == "x" + std::to_string(dim))
    ++dim;
  std::vector<std::string> expected = {"seed", "t"};
  for (int j = 0; j < dim; ++j) expected.push_back("x" + std::to_string(j));
  expected.insert(expected.end(),
                  {"y", "expert", "best_true_value", "abs_error"});
  if (header != expected)
    throw std::invalid_argument(path + ": unexpected trace header");

  Trace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != expected.size())
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": wrong field count");
    TraceRow row;
    row.seed = parse_u64(fields[0]);
    double tmp;
    if (!parse_full_int(fields[1], row.t))
      throw std::invalid_argument(path + ": bad t value");
    row.x.resize(dim);
    for (int j = 0; j < dim; ++j) {
      if (!parse_full_double(fields[2 + j], tmp))
        throw std::invalid_argument(path + ": bad coordinate");
      row.x[j] = tmp;
    }
    if (!parse_full_double(fields[2 + dim], row.y) ||
        !parse_full_int(fields[3 + dim], row.expert) ||
        !parse_full_double(fields[4 + dim], row.best_true_value) ||
        !parse_full_double(fields[5 + dim], row.abs_error))
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": bad numeric field");
    trace.rows.push_back(std::move(row));
  }
  if (!trace.rows.empty()) trace.seed = trace.rows[0].seed;
  return trace;
}

std::vector<SummaryRow> summarize(const std::vector<Trace>& traces,
                                  SummaryMetric metric) {
  if (traces.empty())
    throw std::invalid_argument("summarize: no traces");
  const std::size_t horizon = traces[0].rows.size();
  if (horizon == 0) throw std::invalid_argument("summarize: empty trace");
  for (const auto& tr : traces)
    if (tr.rows.size() != horizon)
      throw std::invalid_argument(
          "summarize: traces disagree on horizon (" +
          std::to_string(tr.rows.size()) + " vs " + std::to_string(horizon) +
          " rows)");
  const int n = static_cast<int>(traces.size());

  if (metric == SummaryMetric::Auto) {
    bool have_error = true;
    for (const auto& tr : traces)
      for (const auto& row : tr.rows)
        if (!std::isfinite(row.abs_error)) have_error = false;
    metric = have_error ? SummaryMetric::AbsError : SummaryMetric::BestTrue;
  }
  // Running minimum of the observed (noisy) y per trace, built on demand.
  std::vector<std::vector<double>> best_y;
  if (metric == SummaryMetric::BestNoisy) {
    best_y.resize(n);
    for (int k = 0; k < n; ++k) {
      best_y[k].resize(horizon);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < horizon; ++i) {
        best = std::min(best, traces[k].rows[i].y);
        best_y[k][i] = best;
      }
    }
  }

  std::vector<SummaryRow> out;
  out.reserve(horizon);
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < horizon; ++i) {
    for (int k = 0; k < n; ++k) {
      const TraceRow& row = traces[k].rows[i];
      switch (metric) {
        case SummaryMetric::AbsError: vals[k] = row.abs_error; break;
        case SummaryMetric::BestNoisy: vals[k] = best_y[k][i]; break;
        default: vals[k] = row.best_true_value; break;
      }
    }
    SummaryRow row;
    row.t = traces[0].rows[i].t;
    row.n = n;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    row.mean = mean;
    if (n > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      row.stderr_mean = std::sqrt(ss / (n - 1)) / std::sqrt(double(n));
    }
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    row.median = n % 2 == 1 ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    row.min = sorted.front();
    row.max = sorted.back();
    out.push_back(row);
  }
  return out;
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       std::ostream& out) {
  out << "t,n,mean,stderr,median,min,max\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.n << ',' << fmt17(r.mean) << ','
        << fmt17(r.stderr_mean) << ',' << fmt17(r.median) << ','
        << fmt17(r.min) << ',' << fmt17(r.max) << '\n';
  }
}

void apply_config_override(ExperimentConfig& cfg, const std::string& raw_key,
                           const std::string& value) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '-', '_');
  auto bad_value = [&]() {
    return std::invalid_argument("config: bad value '" + value + "' for key '" +
                                 raw_key + "'");
  };
  auto as_int = [&]() {
    int v;
    if (!parse_full_int(value, v)) throw bad_value();
    return v;
  };
  auto as_double = [&]() {
    double v;
    if (!parse_full_double(value, v)) throw bad_value();
    return v;
  };
  auto as_bool = [&]() {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw bad_value();
  };
  if (key == "objective") cfg.objective = value;
  else if (key == "method") cfg.method = method_from_string(value);
  else if (key == "horizon") cfg.horizon = as_int();
  else if (key == "n_init") cfg.n_init = as_int();
  else if (key == "seeds") cfg.seeds = parse_seed_spec(value);
  else if (key == "n_random_experts") cfg.n_random_experts = as_int();
  else if (key == "noise_sd") cfg.noise_sd = as_double();
  else if (key == "mcmc_samples") cfg.mcmc_samples = as_int();
  else if (key == "representers") cfg.representers = as_int();
  else if (key == "hallucinations") cfg.hallucinations = as_int();
  else if (key == "joint_samples") cfg.joint_samples = as_int();
  else if (key == "m_features") cfg.m_features = as_int();
  else if (key == "eta") cfg.eta = as_double();
  else if (key == "stratified") cfg.stratified = as_bool();
  else if (key == "threads") cfg.threads = as_int();
  else if (key == "recommend_at_end") cfg.recommend_at_end = as_bool();
  else if (key == "out") cfg.out_dir = value;
  else
    throw std::invalid_argument("config: unknown key '" + raw_key + "'");
}

void apply_config_stream(ExperimentConfig& cfg, std::istream& in,
                         const std::string& where) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(where + ":" + std::to_string(line_no) +
                                  ": empty key");
    apply_config_override(cfg, key, value);
  }
}

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  std::string s = trim(spec);
  if (s.empty()) throw std::invalid_argument("empty seed spec");
  std::vector<std::uint64_t> seeds;
  std::size_t range = s.find("..");
  if (range != std::string::npos) {
    std::uint64_t lo = parse_u64(trim(s.substr(0, range)));
    std::uint64_t hi = parse_u64(trim(s.substr(range + 2)));
    if (hi < lo)
      throw std::invalid_argument("seed range '" + s + "' is reversed");
    for (std::uint64_t v = lo; v <= hi; ++v) {
      seeds.push_back(v);
      if (v == hi) break;  // guard wrap at UINT64_MAX
    }
    return seeds;
  }
  std::istringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ','))
    seeds.push_back(parse_u64(trim(field)));
  if (seeds.empty()) throw std::invalid_argument("empty seed spec");
  return seeds;
}

}  // namespace espbo
