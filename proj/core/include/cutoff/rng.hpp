#pragma once

#include <cstdint>

namespace cutoff {

// Counter-based deterministic generator: the i-th output is the splitmix64
// finalizer applied to key + i*gamma.  Because outputs depend only on
// (key, position), a generator can be forked into independent streams by
// deriving a new key, and the number of draws consumed is observable, which
// the coupling and transcript-identity tests rely on.
//
// Not cryptographic.  Bump kVersion if the mixing constants ever change;
// recorded expectations in the test suite are tied to the sequence.
class Rng {
 public:
  static constexpr std::uint32_t kVersion = 1;

  explicit Rng(std::uint64_t seed) noexcept : key_(seed) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 1;
    return mix64(key_ + counter_ * kGamma);
  }

  // Uniform on the 2^53 grid of [0, 1).  Dyadic values are exact.
  double next_unit53() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, 2^bits).  Requires 0 <= bits <= 63.
  // Always consumes exactly one draw, so parallel streams keep alignment.
  std::uint64_t next_bits(int bits) noexcept {
    std::uint64_t w = next_u64();
    if (bits <= 0) return 0;
    return w >> (64 - bits);
  }

  // Exact for dyadic p with exponent >= -53 (the only p used by the
  // Bernoulli-form sketches); consumes one draw regardless of outcome.
  bool bernoulli(double p) noexcept { return next_unit53() < p; }

  // Independent stream keyed by (this generator's key, stream).  Depends on
  // the key only, not on how many draws were consumed.
  Rng split(std::uint64_t stream) const noexcept {
    Rng child(mix64(mix64(key_ ^ 0x8BB84B93962EACC9ULL) + stream));
    return child;
  }

  std::uint64_t draws_consumed() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cutoff
