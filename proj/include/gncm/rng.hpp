#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace gncm {

/// SplitMix64 finalizer; used to hash stream keys into generator state.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream identifiers for the sampler phases. Each (seed, phase, block, sweep)
/// tuple names an independent random stream, so results do not depend on
/// which worker thread processes which block.
enum class Phase : std::uint64_t {
  init = 0,
  stick = 1,
  mean = 2,
  variance = 3,
  labels = 4,
  noise = 5,
  dirichlet = 6,
  step_search = 7,
  scene = 8,
  potts = 9,
};

/// xoshiro256** seeded from a hashed key tuple. Satisfies
/// UniformRandomBitGenerator so it composes with <random> distributions.
class StreamRng {
public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed) : StreamRng(seed, {}) {}

  StreamRng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(seed);
    for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    for (auto& w : s_) {
      h = mix64(h);
      w = h;
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  StreamRng(std::uint64_t seed, Phase phase, std::uint64_t block, std::uint64_t sweep)
      : StreamRng(seed, {static_cast<std::uint64_t>(phase), block, sweep}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(*this);
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4]{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace gncm
