#pragma once

#include <cstdint>
#include <string>

#include "cutoff/sketch.hpp"

namespace cutoff {

// Inputs to the bucket-limit formulas.  epsilon is a relative accuracy in
// (0, 1].  delta is a failure probability; values above 1 are accepted so
// the formulas can be evaluated at degenerate diagnostic points (callers
// that need an actual guarantee should keep delta in (0, 1]).  m bounds the
// stream length, n the universe; only the variants that mention them read
// them.
struct SizingParams {
  double epsilon = 0.5;
  double delta = 0.1;
  std::uint64_t m = 1;
  std::uint64_t n = 1;
  Variant variant = Variant::Cvm2;
};

struct SizingResult {
  std::uint64_t s = 1;
  std::string formula;  // the expression s was computed from

  // Smallest k >= 0 with s * 2^k >= 2 * f0; the matching initial cutoff
  // guess p0 = 2^-k satisfies s/2 >= f0 * p0 >= s/4 whenever f0 > s.
  int p0_exponent(std::uint64_t f0) const;
  double p0(std::uint64_t f0) const;
};

// Bucket limit for the requested variant, rounded up:
//   DonD                    max(24 ln(4m/d), (24/e^2) ln(96/(e^2 d)))
//   DonDPrime, Cvm1, Cvm2   max(24 ln(4m/d), (6/e^2) ln(8/d))
//   Cvm2Refuse              12 ln(4 min(n,m)/d) + (6/e^2) ln(8/d)
//   Tracking                (12/e^2) ln(8m/d)
SizingResult bucket_limit(const SizingParams& p);

int p0_exponent_for(std::uint64_t f0, std::uint64_t s);

struct BinomialTail {
  double exact = 0.0;  // the summed tail probability
  double bound = 0.0;  // its closed-form exponential bound
};

// Lower tail: P[Bin(n, p) <= n p (1 - eps)], bounded by exp(-n p eps^2 / 2).
// Upper tail: P[Bin(n, p) >= n p (1 + eps)], bounded by exp(-n p eps^2 / 3).
// Requires n >= 1, 0 < p <= 1, 0 < eps <= 1.  Exact summation runs in
// O(n) log-space arithmetic, fine up to n around 10^6.
BinomialTail binomial_tail_lower(std::uint64_t n, double p, double eps);
BinomialTail binomial_tail_upper(std::uint64_t n, double p, double eps);

// True when n p >= 3 eps^-2 ln(1/beta); under that hypothesis both tails
// are at most beta.
bool implication_check(std::uint64_t n, double p, double eps, double beta);

}  // namespace cutoff
