#pragma once

#include <cstdint>

#include "cutoff/rng.hpp"

namespace cutoff {

// A score is a value in [0, 1].  Dyadic scores (the geometric-like families
// and power-of-two discrete uniforms) are represented exactly in a double.
using Score = double;

enum class ScoreDistKind {
  ContinuousUniform,  // uniform on [0, 1), 53-bit grid
  DiscreteUniform,    // uniform on {0, 1/N, ..., (N-1)/N}, N a power of two
  GeoLikeFinite,      // support {2^-(n'+1), ..., 2^-1}; mass 2^-k at 2^-k,
                      // mass 2^-n' at the bottom point 2^-(n'+1)
  GeoLikeInfinite,    // mass 2^-k at 2^-k for every k >= 1
};

class ScoreDistribution {
 public:
  static ScoreDistribution continuous_uniform();
  // n must be a power of two in [1, 2^53] so every support point is exact.
  static ScoreDistribution discrete_uniform(std::uint64_t n);
  // n_prime in [1, 52].
  static ScoreDistribution geo_like_finite(int n_prime);
  static ScoreDistribution geo_like_infinite();

  ScoreDistKind kind() const { return kind_; }
  std::uint64_t n() const { return n_; }            // DiscreteUniform only
  int n_prime() const { return n_prime_; }          // GeoLikeFinite only

 private:
  ScoreDistribution(ScoreDistKind k, std::uint64_t n, int np)
      : kind_(k), n_(n), n_prime_(np) {}

  ScoreDistKind kind_;
  std::uint64_t n_ = 0;
  int n_prime_ = 0;
};

// Round x down to the containing power-of-two bucket: 2^-k for
// 2^-k <= x < 2^-k+1.  Requires 0 < x < 1.
Score map_g_infinite(double x);

// Truncated version: buckets 2^-1 .. 2^-n' as above, and the whole leftover
// interval [0, 2^-n') maps to 2^-(n'+1).  That branch is wider than the
// bucket rule alone would give; it is exactly the extension under which
// mapping a uniform on the 2^n' grid reproduces the finite geometric-like
// distribution.  Requires 0 <= x < 1 and n_prime >= 1.
Score map_g(double x, int n_prime);

// One value from dist.  The geometric-like kinds draw the matching uniform
// and push it through map_g, so two generators with equal state yield
// coupled uniform/geometric pairs.  Consumes exactly one draw per call
// except for the zero-probability redraw of an exact 0.0 uniform.
Score sample_score(const ScoreDistribution& dist, Rng& rng);

// Exact probability mass of [0, p), the divisor of the final estimate.
// Strict at p: support points equal to p do not count.
double cdf_below(const ScoreDistribution& dist, Score p);

}  // namespace cutoff
