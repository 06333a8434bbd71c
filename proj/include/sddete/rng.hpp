#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "sddete/errors.hpp"

namespace sddete {

// splitmix64 finalizer; bijective on 64-bit values.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Derives a child seed from (master, index, purpose). Distinct purposes or
// indices give unrelated streams, and the derivation is pure, so consumers
// can be re-run or reordered without changing each other's draws.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::string_view purpose) {
  return mix64(master ^ mix64(index ^ fnv1a64(purpose)));
}

// Deterministic random stream. The engine is mt19937_64, whose output
// sequence the C++ standard pins down exactly; variate shaping below is
// hand-rolled because the std distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased draw from [0, bound) by rejection.
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw ParameterError("uniform_index: bound must be positive");
    std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ParameterError("uniform_int: empty range");
    std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) +
                                     uniform_index(span));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform_real();
    } while (u1 <= 0.0);
    double u2 = uniform_real();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Child stream keyed off this stream's own seed, not its position, so
  // forks taken in any order or on any thread are identical.
  RngStream fork(std::uint64_t index, std::string_view purpose) const {
    return RngStream(derive_seed(seed_, index, purpose));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline RngStream substream(std::uint64_t master, std::uint64_t index,
                           std::string_view purpose) {
  return RngStream(derive_seed(master, index, purpose));
}

}  // namespace sddete
