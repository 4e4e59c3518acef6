#include "espbo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace espbo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53

// Vectorized Box-Muller into a contiguous buffer.
void fill_normal_buffer(std::mt19937_64& engine, double* data,
                        Eigen::Index total) {
  if (total <= 0) return;
  const Eigen::Index pairs = total / 2;
  Eigen::ArrayXd u1(pairs), u2(pairs);
  for (Eigen::Index i = 0; i < pairs; ++i) {
    // (0,1)-open uniforms so the log below never sees zero.
    u1[i] = (static_cast<double>(engine() >> 11) + 0.5) * kInv53;
    u2[i] = static_cast<double>(engine() >> 11) * kInv53;
  }
  Eigen::ArrayXd r = (-2.0 * u1.log()).sqrt();
  Eigen::ArrayXd ang = kTwoPi * u2;
  Eigen::Map<Eigen::ArrayXd, 0, Eigen::InnerStride<2>>(data, pairs) =
      r * ang.cos();
  Eigen::Map<Eigen::ArrayXd, 0, Eigen::InnerStride<2>>(data + 1, pairs) =
      r * ang.sin();
  if (total % 2 != 0) {
    double v1 = (static_cast<double>(engine() >> 11) + 0.5) * kInv53;
    double v2 = static_cast<double>(engine() >> 11) * kInv53;
    data[total - 1] = std::sqrt(-2.0 * std::log(v1)) * std::cos(kTwoPi * v2);
  }
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix64(base ^ mix64(tag));
}

std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return mix64(h);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * kInv53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  double out;
  fill_normal_buffer(engine_, &out, 1);
  return out;
}

double Rng::chi_squared(double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("Rng::chi_squared: dof <= 0");
  std::gamma_distribution<double> gamma(0.5 * dof, 2.0);
  return gamma(engine_);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n <= 0");
  // Lemire's multiply-shift method with rejection; unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  while (true) {
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low >= bound || low >= (-bound) % bound)
      return static_cast<int>(m >> 64);
  }
}

void Rng::fill_normal_raw(double* data, Eigen::Index n) {
  fill_normal_buffer(engine_, data, n);
}

}  // namespace espbo
