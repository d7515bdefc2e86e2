#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace xmodal {

// Deterministic random source. The mt19937_64 engine is fully specified by
// the standard, and all value transforms below are hand-rolled, so a given
// seed yields the identical stream of draws on every platform and build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53 bits of randomness.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the pair is cached.
  double normal();

  // Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
  std::size_t uniform_index(std::size_t n);

  // Fisher-Yates shuffle driven by uniform_index.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // Child generator seeded from this stream's next draw.
  Rng fork() { return Rng(next_u64()); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Mixes a base seed with a stream tag so that independent consumers
// (sampling, triplet selection, evaluation subsets, ...) get unrelated
// streams from one user-facing seed. splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace xmodal
