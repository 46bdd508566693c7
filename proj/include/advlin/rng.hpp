#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Portable random number generation.
//
// The generator is xoshiro256++ seeded through splitmix64, so the exact
// byte-for-byte stream is reproducible in any language from the published
// reference algorithms.  Independent streams are derived per (seed, purpose
// string, index) as follows:
//
//   base  = seed XOR fnv1a64(purpose)
//   base  = splitmix64_mix(base) XOR (index * 0xd1b54a32d192ed03)
//   state = four successive splitmix64 outputs starting from base
//
// Doubles in [0,1) take the top 53 bits: (x >> 11) * 2^-53.  Normal deviates
// use the Marsaglia polar method with the second deviate cached, so a stream
// of normals consumes uniforms in a fixed, reproducible order.

namespace advlin {

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64_next(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class rng {
 public:
  explicit rng(std::uint64_t seed) { seed_state(seed); }

  rng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0) {
    std::uint64_t base = seed ^ fnv1a64(purpose);
    std::uint64_t tmp = base;
    base = splitmix64_next(tmp) ^ (index * 0xd1b54a32d192ed03ull);
    seed_state(base);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Marsaglia polar method.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return u * f;
  }

  // +1 or -1 with equal probability (top bit of the raw output).
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void seed_state(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64_next(x);
  }

  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace advlin
