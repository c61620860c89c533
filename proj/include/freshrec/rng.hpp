#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace freshrec {

// 64-bit FNV-1a over bytes. Used for substream derivation, experiment arm
// hashing and store sharding; std::hash is avoided because its output is not
// pinned across standard libraries.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 finalizer; FNV-1a alone mixes short keys poorly in the low bits.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// A named, independently seeded generator. One experiment seed fans out into
// per-concern streams ("profiles", "drift", "choice", ...) so adding draws in
// one concern does not perturb the others.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  return std::mt19937_64(mix64(seed ^ mix64(fnv1a64(name))));
}

// Uniform in [0, 1). Explicit construction instead of
// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n); rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

}  // namespace freshrec
