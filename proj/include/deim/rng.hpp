#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace deim {

/// Seeded pseudo-random source shared by every stochastic step (init,
/// dropout, shuffling, negative sampling).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard distributions are implementation-defined,
/// and runs must reproduce bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Serialized engine state (text, as produced by operator<<).
  std::string state() const;
  void restore(const std::string& state);

  /// splitmix64 finalizer; used to derive independent sub-seeds.
  static std::uint64_t mix(std::uint64_t x);

  /// Seed for an independent stream identified by (base, a, b).
  static std::uint64_t derive(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

 private:
  std::mt19937_64 engine_;
};

/// In-place Fisher-Yates shuffle driven by Rng::below.
template <typename Container>
void shuffle(Container& items, Rng& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace deim
