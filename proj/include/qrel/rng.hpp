#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace qrel {

/// SplitMix64 mixing step; whitens seed material so that nearby master seeds
/// yield unrelated streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic sub-seed for component (a, b) of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return s;
}

/// Deterministic random stream: mt19937_64 (whose output sequence the
/// standard pins down exactly) with 53-bit uniforms, so identical seeds give
/// identical draws on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("bernoulli probability must lie in [0, 1]");
    }
    return uniform01() < p;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qrel
