#pragma once

#include <cmath>
#include <cstdint>

namespace gcdl {

// Purpose tags keep the random streams used by different parts of a run
// disjoint from each other.
enum class StreamPurpose : std::uint64_t {
  kRegressionFeatures = 1,
  kRegressionNoise = 2,
  kRegressionBetaStar = 3,
  kParamInit = 4,
  kAssignment = 5,
  kStraggler = 6,
  kQuantizer = 7,
  kIdxSubset = 8,
  kPairSample = 9,
};

// Counter-based random stream keyed by (seed, purpose, t, unit). Every draw
// is a pure function of the key and the draw index, so streams with distinct
// keys can be consumed in any order without affecting one another. The
// generator is splitmix64 with the initial state derived from the key.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, StreamPurpose purpose,
                     std::uint64_t t = 0, std::uint64_t unit = 0) {
    key_ = mix(seed);
    key_ = mix(key_ ^ (static_cast<std::uint64_t>(purpose) + 0x510e527fade682d1ULL));
    key_ = mix(key_ ^ (t + 0x9b05688c2b3e6c1fULL));
    key_ = mix(key_ ^ (unit + 0x1f83d9abfb41bd6bULL));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix(key_ + counter_);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bernoulli(double prob) { return next_double() < prob; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_double();  // (0, 1], keeps the log finite
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, bound), unbiased via rejection. bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gcdl
