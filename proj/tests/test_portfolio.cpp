#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "espbo/portfolio.hpp"
#include "oracles.hpp"

using espbo::Box;
using espbo::Candidate;
using espbo::EspConfig;
using espbo::EspResult;
using espbo::HedgeState;
using espbo::History;
using espbo::Hyperparams;
using espbo::RepresenterSet;
using espbo::Rng;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Candidate cand1(double a, const char* src = "x") {
  return Candidate{vec1(a), src};
}

History valley_history() {
  History d(Box::unit(1));
  for (double x : {0.1, 0.35, 0.6, 0.85})
    d.add(vec1(x), std::pow(x - 0.4, 2));
  return d;
}

std::vector<Hyperparams> one_hp() {
  std::vector<Hyperparams> hps;
  hps.emplace_back(vec1(0.25), 1.0, 1e-4, 0.2);
  return hps;
}

EspConfig small_cfg() {
  EspConfig cfg;
  cfg.hallucinations = 3;
  cfg.joint_samples = 200;
  Eigen::MatrixXd reps(6, 1);
  reps << 0.05, 0.2, 0.4, 0.55, 0.7, 0.9;
  cfg.fixed_representers = reps;
  return cfg;
}

}  // namespace

TEST_CASE("empirical pmin counts column argmins with ties to the left") {
  // Frozen 4 x 3 example: row argmins at columns 0, 2, 2, 1.
  Eigen::MatrixXd s(4, 3);
  s << 0.0, 1.0, 2.0,
       3.0, 2.0, 1.0,
       5.0, 4.0, 3.0,
       2.0, 0.5, 0.7;
  Eigen::VectorXd p = espbo::empirical_pmin(s);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 0.25);
  CHECK(p[2] == 0.5);

  // Exact ties go to the lowest column index.
  Eigen::MatrixXd t(2, 3);
  t << 1.0, 1.0, 1.0,
       7.0, 2.0, 2.0;
  Eigen::VectorXd q = espbo::empirical_pmin(t);
  CHECK(q[0] == 0.5);
  CHECK(q[1] == 0.5);
  CHECK(q[2] == 0.0);
}

TEST_CASE("empirical pmin sums to one on random samples") {
  Rng rng(61);
  Eigen::MatrixXd s(50, 7);
  rng.fill_normal(s);
  Eigen::VectorXd p = espbo::empirical_pmin(s);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((p.array() >= 0.0).all());
}

TEST_CASE("entropy of degenerate and uniform distributions") {
  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(5);
  onehot[2] = 1.0;
  CHECK(espbo::entropy(onehot) == 0.0);

  for (int g : {2, 3, 10, 100}) {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(g, 1.0 / g);
    CHECK(espbo::entropy(u) ==
          doctest::Approx(std::log(double(g))).epsilon(1e-12));
  }
  // ln 2, frozen.
  Eigen::VectorXd half(4);
  half << 0.5, 0.0, 0.5, 0.0;
  CHECK(espbo::entropy(half) ==
        doctest::Approx(0.69314718055994531).epsilon(1e-14));
}

TEST_CASE("entropy is maximized by the uniform distribution") {
  Rng rng(62);
  const double uniform_h = std::log(6.0);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd p(6);
    for (int j = 0; j < 6; ++j) p[j] = rng.uniform() + 1e-12;
    p /= p.sum();
    CHECK(espbo::entropy(p) <= uniform_h + 1e-12);
  }
}

TEST_CASE("representer pool splits draws across hyperparameter samples") {
  History d = valley_history();
  std::vector<Hyperparams> hps;
  hps.emplace_back(vec1(0.25), 1.0, 1e-4, 0.2);
  hps.emplace_back(vec1(0.4), 0.8, 1e-4, 0.1);
  hps.emplace_back(vec1(0.15), 1.2, 1e-4, 0.3);
  Rng rng(63);
  RepresenterSet reps = espbo::sample_representers(d, hps, 20, 200, rng);
  CHECK(reps.points.rows() == 20);
  CHECK(reps.points.cols() == 1);
  REQUIRE(reps.blocks.size() == 3);
  // 20 = 8 + 6 + 6 with the full remainder on the first block.
  CHECK(reps.blocks[0].second == 8);
  CHECK(reps.blocks[1].second == 6);
  CHECK(reps.blocks[2].second == 6);
  CHECK(reps.blocks[0].first == 0);
  CHECK(reps.blocks[1].first == 8);
  CHECK(reps.blocks[2].first == 14);
  for (int i = 0; i < 20; ++i)
    CHECK(Box::unit(1).contains(reps.points.row(i).transpose()));
}

TEST_CASE("representer pools are reproducible and thread-invariant") {
  History d = valley_history();
  std::vector<Hyperparams> hps = one_hp();
  hps.emplace_back(vec1(0.35), 0.9, 1e-4, 0.0);
  Rng a(64), b(64), c(64);
  RepresenterSet r1 = espbo::sample_representers(d, hps, 12, 200, a, 1);
  RepresenterSet r2 = espbo::sample_representers(d, hps, 12, 200, b, 1);
  RepresenterSet r4 = espbo::sample_representers(d, hps, 12, 200, c, 4);
  CHECK((r1.points.array() == r2.points.array()).all());
  CHECK((r1.points.array() == r4.points.array()).all());
}

TEST_CASE("representers concentrate near the posterior minimum") {
  // Deep, well-observed valley at 0.4 with small noise: most Thompson
  // draws should land close to it.
  History d(Box::unit(1));
  for (int i = 0; i <= 16; ++i) {
    const double x = i / 16.0;
    d.add(vec1(x), 4.0 * std::pow(x - 0.4, 2));
  }
  std::vector<Hyperparams> hps;
  hps.emplace_back(vec1(0.2), 1.0, 1e-6, 0.5);
  Rng rng(65);
  RepresenterSet reps = espbo::sample_representers(d, hps, 40, 500, rng);
  int near = 0;
  for (int i = 0; i < 40; ++i)
    if (std::abs(reps.points(i, 0) - 0.4) < 0.1) ++near;
  CHECK(near >= 32);
}

TEST_CASE("single-candidate selection skips simulation") {
  History d = valley_history();
  std::vector<Candidate> cands{cand1(0.5)};
  Rng rng(66);
  EspResult r =
      espbo::esp_select_detailed(cands, d, one_hp(), small_cfg(), rng);
  CHECK(r.selected == 0);
  CHECK(r.utilities.size() == 0);
}

TEST_CASE("esp utilities are permutation equivariant") {
  History d = valley_history();
  std::vector<Candidate> order1{cand1(0.15), cand1(0.45), cand1(0.75)};
  std::vector<Candidate> order2{cand1(0.75), cand1(0.15), cand1(0.45)};
  EspConfig cfg = small_cfg();
  Rng a(67), b(67);
  EspResult r1 = espbo::esp_select_detailed(order1, d, one_hp(), cfg, a);
  EspResult r2 = espbo::esp_select_detailed(order2, d, one_hp(), cfg, b);
  REQUIRE(r1.utilities.size() == 3);
  REQUIRE(r2.utilities.size() == 3);
  CHECK(r1.utilities[0] == r2.utilities[1]);
  CHECK(r1.utilities[1] == r2.utilities[2]);
  CHECK(r1.utilities[2] == r2.utilities[0]);
  CHECK(order1[r1.selected].point[0] == order2[r2.selected].point[0]);
}

TEST_CASE("duplicate candidates score identically and ties go left") {
  History d = valley_history();
  std::vector<Candidate> cands{cand1(0.3, "ei"), cand1(0.62, "pi"),
                               cand1(0.3, "thompson")};
  Rng rng(68);
  EspResult r =
      espbo::esp_select_detailed(cands, d, one_hp(), small_cfg(), rng);
  REQUIRE(r.utilities.size() == 3);
  CHECK(r.utilities[0] == r.utilities[2]);  // bitwise identical
  if (r.utilities[0] >= r.utilities[1]) CHECK(r.selected == 0);
}

TEST_CASE("esp selection is deterministic per seed") {
  History d = valley_history();
  std::vector<Candidate> cands{cand1(0.2), cand1(0.5), cand1(0.8)};
  Rng a(69), b(69);
  EspResult r1 =
      espbo::esp_select_detailed(cands, d, one_hp(), small_cfg(), a);
  EspResult r2 =
      espbo::esp_select_detailed(cands, d, one_hp(), small_cfg(), b);
  CHECK(r1.selected == r2.selected);
  CHECK((r1.utilities.array() == r2.utilities.array()).all());
}

TEST_CASE("esp utilities are thread-count invariant") {
  History d = valley_history();
  std::vector<Candidate> cands{cand1(0.2), cand1(0.5), cand1(0.8)};
  std::vector<Hyperparams> hps = one_hp();
  hps.emplace_back(vec1(0.35), 0.9, 1e-4, 0.0);
  EspConfig cfg = small_cfg();
  Rng a(70), b(70);
  cfg.threads = 1;
  EspResult r1 = espbo::esp_select_detailed(cands, d, hps, cfg, a);
  cfg.threads = 4;
  EspResult r4 = espbo::esp_select_detailed(cands, d, hps, cfg, b);
  CHECK((r1.utilities.array() == r4.utilities.array()).all());
}

TEST_CASE("utilities never exceed the negative-entropy ceiling") {
  // Utilities are expected negative entropies, so they live in
  // [-log(g), 0] for a pool of g representers.
  History d = valley_history();
  std::vector<Candidate> cands{cand1(0.1), cand1(0.4), cand1(0.9)};
  EspConfig cfg = small_cfg();
  const double g = double(cfg.fixed_representers->rows());
  Rng rng(71);
  EspResult r = espbo::esp_select_detailed(cands, d, one_hp(), cfg, rng);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.utilities[k] <= 0.0);
    CHECK(r.utilities[k] >= -std::log(g) - 1e-12);
  }
}

TEST_CASE("informative candidates beat far-away ones") {
  // A candidate inside the uncertain gap between observations should
  // concentrate the minimizer belief more than one at a well-observed edge.
  History d(Box::unit(1));
  d.add(vec1(0.05), 0.9);
  d.add(vec1(0.95), 1.1);
  std::vector<Hyperparams> hps;
  hps.emplace_back(vec1(0.2), 1.0, 1e-4, 1.0);
  EspConfig cfg;
  cfg.hallucinations = 5;
  cfg.joint_samples = 500;
  Eigen::MatrixXd reps(9, 1);
  for (int i = 0; i < 9; ++i) reps(i, 0) = 0.1 + 0.1 * i;
  cfg.fixed_representers = reps;
  std::vector<Candidate> cands{cand1(0.5), cand1(0.05)};
  Rng rng(72);
  EspResult r = espbo::esp_select_detailed(cands, d, hps, cfg, rng);
  CHECK(r.utilities[0] > r.utilities[1]);
  CHECK(r.selected == 0);
}

TEST_CASE("esp agrees with a brute-force reference on a toy problem") {
  // Small version of the acceptance check: same moments, same outcome
  // levels, completely different sampling code paths.
  History d(Box::unit(1));
  d.add(vec1(0.2), 0.4);
  d.add(vec1(0.55), -0.1);
  d.add(vec1(0.9), 0.6);
  Hyperparams hp(vec1(0.3), 1.0, 1e-2, 0.2);
  std::vector<Hyperparams> hps{hp};
  Eigen::MatrixXd grid(5, 1);
  grid << 0.1, 0.3, 0.5, 0.7, 0.9;

  EspConfig cfg;
  cfg.hallucinations = 5;
  cfg.joint_samples = 40000;
  cfg.fixed_representers = grid;

  std::vector<Candidate> cands;
  for (int i = 0; i < 5; ++i) cands.push_back(cand1(grid(i, 0)));

  int agree = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    const int got = espbo::esp_select(cands, d, hps, cfg, rng);
    const int want =
        oracle::esp_brute_force(d, hp, grid, cfg.hallucinations, 200000,
                                seed + 1000);
    if (got == want) ++agree;
  }
  CHECK(agree >= 2);
}

TEST_CASE("hedge selection follows the gain weights") {
  HedgeState st;
  st.gains = Eigen::VectorXd::Zero(3);
  st.eta = 1.0;
  // Extreme gains make the argmax near-certain.
  st.gains << 0.0, 50.0, 0.0;
  Rng rng(73);
  for (int i = 0; i < 50; ++i) CHECK(espbo::hedge_select(st, rng) == 1);

  // Equal gains give a roughly uniform draw.
  st.gains.setZero();
  Eigen::Vector3i counts = Eigen::Vector3i::Zero();
  for (int i = 0; i < 3000; ++i) ++counts[espbo::hedge_select(st, rng)];
  for (int k = 0; k < 3; ++k) {
    CHECK(counts[k] > 800);
    CHECK(counts[k] < 1200);
  }
}

TEST_CASE("hedge weights are overflow-safe") {
  HedgeState st;
  st.gains = Eigen::VectorXd::Zero(2);
  st.gains << 10000.0, 9999.0;  // exp would overflow without max-shift
  Rng rng(74);
  int first = 0;
  for (int i = 0; i < 2000; ++i)
    if (espbo::hedge_select(st, rng) == 0) ++first;
  // exp(1) / (exp(1) + 1) ~= 0.731
  CHECK(first > 1350);
  CHECK(first < 1580);
}

TEST_CASE("hedge update accumulates rewards") {
  HedgeState st;
  st.gains = Eigen::VectorXd::Zero(3);
  st = espbo::hedge_update(std::move(st), Eigen::Vector3d(1.0, -0.5, 0.0));
  st = espbo::hedge_update(std::move(st), Eigen::Vector3d(0.5, 1.0, 0.0));
  CHECK(st.gains[0] == doctest::Approx(1.5));
  CHECK(st.gains[1] == doctest::Approx(0.5));
  CHECK(st.gains[2] == 0.0);
}

TEST_CASE("random portfolio choice is uniform") {
  Rng rng(75);
  Eigen::Vector4i counts = Eigen::Vector4i::Zero();
  for (int i = 0; i < 4000; ++i) {
    const int k = espbo::random_portfolio_select(4, rng);
    REQUIRE(k >= 0);
    REQUIRE(k < 4);
    ++counts[k];
  }
  for (int k = 0; k < 4; ++k) {
    CHECK(counts[k] > 850);
    CHECK(counts[k] < 1150);
  }
}
