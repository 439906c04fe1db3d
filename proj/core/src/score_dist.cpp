#include "cutoff/score_dist.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cutoff {

ScoreDistribution ScoreDistribution::continuous_uniform() {
  return {ScoreDistKind::ContinuousUniform, 0, 0};
}

ScoreDistribution ScoreDistribution::discrete_uniform(std::uint64_t n) {
  if (n == 0 || !std::has_single_bit(n) || n > (1ULL << 53))
    throw std::invalid_argument("discrete_uniform: n must be a power of two in [1, 2^53]");
  return {ScoreDistKind::DiscreteUniform, n, 0};
}

ScoreDistribution ScoreDistribution::geo_like_finite(int n_prime) {
  if (n_prime < 1 || n_prime > 52)
    throw std::invalid_argument("geo_like_finite: n_prime must be in [1, 52]");
  return {ScoreDistKind::GeoLikeFinite, 0, n_prime};
}

ScoreDistribution ScoreDistribution::geo_like_infinite() {
  return {ScoreDistKind::GeoLikeInfinite, 0, 0};
}

Score map_g_infinite(double x) {
  if (!(x > 0.0) || x >= 1.0)
    throw std::invalid_argument("map_g_infinite: x must be in (0, 1)");
  int e;  // x = f * 2^e with f in [0.5, 1), so the bucket is 2^(e-1)
  std::frexp(x, &e);
  return std::ldexp(1.0, e - 1);
}

Score map_g(double x, int n_prime) {
  if (n_prime < 1) throw std::invalid_argument("map_g: n_prime must be >= 1");
  if (x < 0.0 || x >= 1.0)
    throw std::invalid_argument("map_g: x must be in [0, 1)");
  double bottom = std::ldexp(1.0, -n_prime);  // 2^-n'
  if (x < bottom) return bottom / 2.0;        // whole leftover interval
  int e;
  std::frexp(x, &e);
  return std::ldexp(1.0, e - 1);
}

Score sample_score(const ScoreDistribution& dist, Rng& rng) {
  switch (dist.kind()) {
    case ScoreDistKind::ContinuousUniform:
      return rng.next_unit53();
    case ScoreDistKind::DiscreteUniform: {
      int bits = std::countr_zero(dist.n());
      std::uint64_t i = rng.next_bits(bits);
      return std::ldexp(static_cast<double>(i), -bits);
    }
    case ScoreDistKind::GeoLikeFinite: {
      int np = dist.n_prime();
      std::uint64_t i = rng.next_bits(np);
      return map_g(std::ldexp(static_cast<double>(i), -np), np);
    }
    case ScoreDistKind::GeoLikeInfinite: {
      double u = rng.next_unit53();
      while (u == 0.0) u = rng.next_unit53();  // p = 2^-53 per call
      return map_g_infinite(u);
    }
  }
  throw std::logic_error("sample_score: bad kind");
}

namespace {

// Mass of the infinite geometric-like distribution below p.  The support
// points below p form a geometric series summing to twice the largest one,
// so the mass is p itself when p is a support point and the next power of
// two above p otherwise (capped at 1).
double geo_infinite_below(double p) {
  if (p <= 0.0) return 0.0;
  if (p > 0.5) return 1.0;
  int e;
  double f = std::frexp(p, &e);
  return (f == 0.5) ? p : std::ldexp(1.0, e);
}

}  // namespace

double cdf_below(const ScoreDistribution& dist, Score p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("cdf_below: p must be in [0, 1]");
  switch (dist.kind()) {
    case ScoreDistKind::ContinuousUniform:
      return p;
    case ScoreDistKind::DiscreteUniform: {
      // #{i in [0, N) : i/N < p} = min(N, ceil(p*N)); p*N is exact for the
      // dyadic p this is called with.
      double scaled = p * static_cast<double>(dist.n());
      double count = std::ceil(scaled);
      double n = static_cast<double>(dist.n());
      if (count > n) count = n;
      return count / n;
    }
    case ScoreDistKind::GeoLikeInfinite:
      return geo_infinite_below(p);
    case ScoreDistKind::GeoLikeFinite: {
      // Same as the infinite case above the bottom point; nothing lies
      // below 2^-(n'+1), which is where the family stops being linear.
      double bottom = std::ldexp(1.0, -dist.n_prime() - 1);
      if (p <= bottom) return 0.0;
      return geo_infinite_below(p);
    }
  }
  throw std::logic_error("cdf_below: bad kind");
}

}  // namespace cutoff
