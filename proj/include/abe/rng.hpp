#pragma once

#include <cstdint>
#include <random>

namespace abe {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent substream (particle, fold, ...) of a base seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// mt19937_64 with distribution code written out so results do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const unsigned __int128 product = static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::uint64_t>(product >> 64);
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace abe
