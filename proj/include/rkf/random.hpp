#ifndef RKF_RANDOM_HPP
#define RKF_RANDOM_HPP

#include <cmath>
#include <cstdint>

namespace rkf {

/// Deterministic standard-normal sampler (xoshiro-seeded splitmix64 state,
/// Box-Muller transform). Self-contained so that seeded simulations replay
/// identically regardless of the standard library's distribution internals.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : state_(seed) {
    // Warm up past short seed patterns.
    next_u64();
    next_u64();
  }

  /// Derives an independent stream for sub-task `index` (e.g. one Monte Carlo
  /// trajectory) from a base seed.
  static GaussianSampler derived(std::uint64_t seed, std::uint64_t index) {
    GaussianSampler g(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return g;
  }

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rkf

#endif  // RKF_RANDOM_HPP
