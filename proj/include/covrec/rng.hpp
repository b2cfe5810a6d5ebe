#pragma once

#include <cmath>
#include <cstdint>

// Counter-based Gaussian stream: every draw is a pure function of
// (seed, replicate, mode), so concurrently filled rows come out
// bit-identical no matter how the loop is scheduled.

namespace covrec::rng {

// splitmix64 finalizer; strong avalanche, cheap enough to call per draw
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t replicate, std::uint64_t mode) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ (replicate + 0xd1b54a32d192ed03ULL));
  h = mix(h ^ (mode + 0x8bb84b93962eacc9ULL));
  return h;
}

// map 64 random bits to (0,1); the offset keeps log() finite at both ends
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// one N(0,1) draw per key (Box-Muller, cosine branch)
inline double normal(std::uint64_t seed, std::uint64_t replicate, std::uint64_t mode) {
  const std::uint64_t k = key(seed, replicate, mode);
  const double u1 = uniform01(k);
  const double u2 = uniform01(mix(k ^ 0xa0761d6478bd642fULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// independent sub-stream seed, e.g. one per experiment replicate
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
  return key(seed, index, 0x5eed5eed5eed5eedULL);
}

}  // namespace covrec::rng
