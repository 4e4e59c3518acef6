#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <random>

namespace espbo {

// SplitMix64 finalizer. Bijective mixing of a 64-bit word; used to derive
// decorrelated child seeds from (seed, tag) pairs.
std::uint64_t mix64(std::uint64_t x);

// Child seed for a named purpose. Streams derived with distinct tags from the
// same base seed behave as independent generators.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

// FNV-1a over raw bytes, finished with mix64. Used to key random streams by
// the content of a point rather than by its position in a list.
std::uint64_t hash_bytes(const void* data, std::size_t n,
                         std::uint64_t seed = 0);

// Seeded random stream. All randomness in the library flows through
// explicitly passed Rng instances, never through global state, so identical
// seeds give identical runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (one value per call, pair discarded, so
  // call sequences stay independent of caller pairing).
  double normal();

  // Chi-squared with dof degrees of freedom.
  double chi_squared(double dof);

  // Uniform over {0, ..., n - 1}; n must be positive.
  int uniform_int(int n);

  // Draws a seed suitable for constructing an independent child stream.
  std::uint64_t fork_seed() { return mix64(engine_()); }
  Rng fork() { return Rng(fork_seed()); }

  // Bulk standard-normal fill (vectorized Box-Muller over the whole block).
  // Takes plain matrices/vectors, whose storage is always contiguous.
  template <typename Derived>
  void fill_normal(Eigen::PlainObjectBase<Derived>& out) {
    static_assert(std::is_same_v<typename Derived::Scalar, double>,
                  "fill_normal requires double storage");
    fill_normal_raw(out.data(), out.size());
  }

 private:
  void fill_normal_raw(double* data, Eigen::Index n);

  std::mt19937_64 engine_;
};

}  // namespace espbo
