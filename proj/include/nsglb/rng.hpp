#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nsglb {

// Named PRNG streams. A run is keyed by a single 64-bit seed; every consumer
// (arm draws, reward noise, EXP3 master, ...) gets its own stream so that
// adding or removing one consumer never perturbs the draws of another.
enum class Stream : std::uint64_t {
  arms = 1,
  rewards = 2,
  exp3 = 3,
  scratch = 4,
};

namespace detail {
// splitmix64, the usual seed scrambler.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Stream split: (seed, stream-id) -> independent mt19937_64.
// Documented contract: stream k of seed s is mt19937_64 seeded with
// splitmix64(splitmix64(s) ^ splitmix64(k)).
inline std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  const std::uint64_t mixed =
      detail::splitmix64(detail::splitmix64(seed) ^
                         detail::splitmix64(static_cast<std::uint64_t>(stream)));
  return std::mt19937_64(mixed);
}

// Uniform in [0,1). Mapped by hand (53-bit mantissa) so the stream is a pure
// function of the engine output, independent of libstdc++'s distribution
// internals.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Standard normal via Box-Muller; consumes exactly two engine outputs.
inline double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace nsglb
