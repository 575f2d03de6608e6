#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace acsbm {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for stream `id` under `parent`. Used to give every replicate,
// block and restart its own independent generator.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id) noexcept {
  return mix64(mix64(parent ^ 0x6a09e667f3bcc909ULL) + mix64(id + 0x3c6ef372fe94f82bULL));
}

template <typename... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id, Ids... rest) noexcept {
  return derive_seed(derive_seed(parent, id), static_cast<std::uint64_t>(rest)...);
}

/// Counter-based generator: the i-th output is a keyed hash of i, so a
/// stream is fully described by (key, counter) and can be split without
/// sharing state. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed = 0) noexcept
      : key_lo_(mix64(seed)), key_hi_(mix64(seed ^ 0xa54ff53a5f1d36f1ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t c = counter_++;
    return mix64(mix64(c + key_lo_) ^ key_hi_);
  }

  CounterRng split(std::uint64_t id) const noexcept {
    return CounterRng(derive_seed(key_lo_ ^ key_hi_, id));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_positive() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller; one draw per call.
  double normal() noexcept {
    const double u1 = uniform_positive();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_lo_;
  std::uint64_t key_hi_;
  std::uint64_t counter_ = 0;
};

}  // namespace acsbm
