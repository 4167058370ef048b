#pragma once

#include <cmath>
#include <cstdint>

namespace follownet {

/// Seeded pseudo-random source used by every stochastic routine.
///
/// The stream is xoshiro256** seeded through splitmix64 from a single 64-bit
/// seed. All derived variates (bounded integers, unit reals, exponentials) are
/// computed here rather than through <random> distributions, whose algorithms
/// are implementation-defined, so a given seed yields the same stream on every
/// platform. `draws()` counts raw 64-bit outputs consumed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      word = splitmix64(x);
    }
  }

  std::uint64_t next_u64() noexcept {
    ++draws_;
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    if (bound <= 1) {
      return 0;
    }
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Exponential variate with the given mean (inverse transform).
  double exponential(double mean) noexcept {
    return -mean * std::log1p(-uniform01());
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  std::uint64_t draws() const noexcept { return draws_; }

private:
  static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  std::uint64_t draws_ = 0;
};

} // namespace follownet
