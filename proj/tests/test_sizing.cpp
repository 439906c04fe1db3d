#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "cutoff/sizing.hpp"

using namespace cutoff;

namespace {

// Exact dyadic oracle: sum_{x=lo..hi} C(n,x) / 2^n via integer Pascal rows.
// Valid for p = 1/2 and n small enough that the row fits in 128 bits.
long double half_binomial_mass(int n, int lo, int hi) {
  std::vector<unsigned __int128> row(n + 1, 0);
  row[0] = 1;
  for (int r = 1; r <= n; ++r)
    for (int x = r; x >= 1; --x) row[x] += row[x - 1];
  unsigned __int128 sum = 0;
  for (int x = std::max(lo, 0); x <= hi && x <= n; ++x) sum += row[x];
  return static_cast<long double>(sum) * std::ldexp(1.0L, -n);
}

SizingParams params(Variant v, double eps, double delta, std::uint64_t m,
                    std::uint64_t n = std::uint64_t(-1)) {
  SizingParams p;
  p.epsilon = eps;
  p.delta = delta;
  p.m = m;
  p.n = n;
  p.variant = v;
  return p;
}

}  // namespace

TEST_CASE("binomial upper tail against the integer oracle at p = 1/2") {
  auto t = binomial_tail_upper(100, 0.5, 0.2);
  long double oracle = half_binomial_mass(100, 60, 100);
  CHECK(double(oracle) == doctest::Approx(0.028443966820490395).epsilon(1e-13));
  CHECK(t.exact == doctest::Approx(double(oracle)).epsilon(1e-11));
  CHECK(t.bound == doctest::Approx(std::exp(-2.0 / 3.0)).epsilon(1e-13));

  auto l = binomial_tail_lower(100, 0.5, 0.2);
  long double lora = half_binomial_mass(100, 0, 40);
  CHECK(l.exact == doctest::Approx(double(lora)).epsilon(1e-11));
  CHECK(l.bound == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));

  // A second, asymmetric point.
  auto t2 = binomial_tail_upper(64, 0.5, 0.5);  // x >= 48
  CHECK(t2.exact == doctest::Approx(double(half_binomial_mass(64, 48, 64)))
                        .epsilon(1e-11));
}

TEST_CASE("lower tail at eps = 1 collapses to the empty-success mass") {
  auto t = binomial_tail_lower(10, 0.3, 1.0);
  CHECK(t.exact == doctest::Approx(std::pow(0.7, 10)).epsilon(1e-12));
  auto u = binomial_tail_lower(50, 0.97, 1.0);
  CHECK(u.exact == doctest::Approx(std::pow(0.03, 50)).epsilon(1e-9));
  auto v = binomial_tail_lower(5, 1.0, 1.0);
  CHECK(v.exact == 0.0);  // all trials succeed
}

TEST_CASE("upper tail above n is exactly zero") {
  auto t = binomial_tail_upper(5, 1.0, 0.5);  // threshold 7.5 > 5
  CHECK(t.exact == 0.0);
  CHECK(t.bound > 0.0);
}

TEST_CASE("exact tails never exceed their exponential bounds") {
  for (std::uint64_t n : {1ull, 10ull, 100ull, 1000ull, 10000ull})
    for (double p : {0.01, 0.1, 0.5, 0.9, 1.0})
      for (double eps : {0.1, 0.5, 1.0}) {
        auto lo = binomial_tail_lower(n, p, eps);
        auto hi = binomial_tail_upper(n, p, eps);
        CHECK(lo.exact >= 0.0);
        CHECK(lo.exact <= 1.0);
        CHECK(hi.exact >= 0.0);
        CHECK(hi.exact <= 1.0);
        CHECK(lo.exact <= lo.bound + 1e-12);
        CHECK(hi.exact <= hi.bound + 1e-12);
      }
}

TEST_CASE("a million-trial tail evaluates and respects its bound") {
  auto t = binomial_tail_upper(1000000, 0.001, 0.1);
  CHECK(t.bound == doctest::Approx(std::exp(-10.0 / 3.0)).epsilon(1e-12));
  CHECK(t.exact > 0.0);
  CHECK(t.exact <= t.bound);
  auto l = binomial_tail_lower(1000000, 0.001, 0.1);
  CHECK(l.exact <= l.bound);
}

TEST_CASE("sample-count hypothesis forces both tails below beta") {
  for (std::uint64_t n : {100ull, 1000ull, 20000ull})
    for (double p : {0.01, 0.1, 0.5})
      for (double eps : {0.2, 0.5, 1.0})
        for (double beta : {0.5, 0.2, 0.05, 0.01})
          if (implication_check(n, p, eps, beta)) {
            CHECK(binomial_tail_lower(n, p, eps).exact <= beta);
            CHECK(binomial_tail_upper(n, p, eps).exact <= beta);
          }
  // The hypothesis itself is a threshold on n p.
  CHECK(implication_check(1000, 0.5, 1.0, 0.01));
  CHECK_FALSE(implication_check(10, 0.001, 0.1, 0.01));
}

TEST_CASE("tail argument validation") {
  CHECK_THROWS_AS(binomial_tail_upper(0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_tail_upper(10, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_tail_upper(10, 1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_tail_upper(10, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(binomial_tail_upper(10, 0.5, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(implication_check(10, 0.5, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("bucket limits at the reference point eps=1/2, delta=1/10, m=1000") {
  CHECK(bucket_limit(params(Variant::DonD, 0.5, 0.1, 1000)).s == 793);
  CHECK(bucket_limit(params(Variant::DonDPrime, 0.5, 0.1, 1000)).s == 255);
  CHECK(bucket_limit(params(Variant::Cvm1, 0.5, 0.1, 1000)).s == 255);
  CHECK(bucket_limit(params(Variant::Cvm2, 0.5, 0.1, 1000)).s == 255);
  CHECK(bucket_limit(params(Variant::Cvm2Refuse, 0.5, 0.1, 1000, 500)).s == 225);
  CHECK(bucket_limit(params(Variant::Cvm2Refuse, 0.5, 0.1, 1000)).s == 233);
  CHECK(bucket_limit(params(Variant::Tracking, 0.5, 0.1, 1000)).s == 542);
}

TEST_CASE("formula strings name their variant") {
  CHECK(bucket_limit(params(Variant::DonD, 0.5, 0.1, 10)).formula ==
        "max(24*ln(4m/delta), (24/eps^2)*ln(96/(eps^2*delta)))");
  CHECK(bucket_limit(params(Variant::Cvm2, 0.5, 0.1, 10)).formula ==
        "max(24*ln(4m/delta), (6/eps^2)*ln(8/delta))");
  CHECK(bucket_limit(params(Variant::Cvm2Refuse, 0.5, 0.1, 10)).formula ==
        "12*ln(4*min(n,m)/delta) + (6/eps^2)*ln(8/delta)");
  CHECK(bucket_limit(params(Variant::Tracking, 0.5, 0.1, 10)).formula ==
        "(12/eps^2)*ln(8m/delta)");
}

TEST_CASE("per-prefix sizing hits the designed integer at a degenerate point") {
  // eps = 1 and delta = 8m/e make the expression exactly 12 ln e = 12; the
  // rounding nudge must not push it to 13.  delta above 1 is accepted here.
  double delta = 8000.0 / std::exp(1.0);
  CHECK(bucket_limit(params(Variant::Tracking, 1.0, delta, 1000)).s == 12);
}

TEST_CASE("bucket limits grow monotonically in the demands") {
  for (Variant v : {Variant::DonD, Variant::Cvm2, Variant::Cvm2Refuse,
                    Variant::Tracking}) {
    auto s = [&](double eps, double delta, std::uint64_t m) {
      return bucket_limit(params(v, eps, delta, m)).s;
    };
    CHECK(s(0.1, 0.1, 1000) >= s(0.5, 0.1, 1000));
    CHECK(s(0.5, 0.01, 1000) >= s(0.5, 0.1, 1000));
    CHECK(s(0.5, 0.1, 100000) >= s(0.5, 0.1, 1000));
    CHECK(s(1.0, 1.0, 1) >= 1);
  }
  // The continuous-score variant pays an extra factor over the others.
  for (double eps : {0.1, 0.3, 0.5, 1.0})
    CHECK(bucket_limit(params(Variant::DonD, eps, 0.1, 1000)).s >=
          bucket_limit(params(Variant::DonDPrime, eps, 0.1, 1000)).s);
}

TEST_CASE("sizing argument validation") {
  CHECK_THROWS_AS(bucket_limit(params(Variant::Cvm2, 0.0, 0.1, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(bucket_limit(params(Variant::Cvm2, 1.5, 0.1, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(bucket_limit(params(Variant::Cvm2, 0.5, 0.0, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(bucket_limit(params(Variant::Cvm2, 0.5, 0.1, 0)),
                  std::invalid_argument);
  CHECK_NOTHROW(bucket_limit(params(Variant::Cvm2, 0.5, 2.0, 10)));  // delta > 1
}

TEST_CASE("initial-cutoff exponent is minimal and sandwiches F0") {
  CHECK(p0_exponent_for(2000, 793) == 3);   // 793*8 >= 4000 > 793*4
  CHECK(p0_exponent_for(2000, 310) == 4);
  CHECK(p0_exponent_for(0, 17) == 0);
  CHECK(p0_exponent_for(1, 2) == 0);
  CHECK(p0_exponent_for(1000000000000000000ull, 1) == 61);

  for (std::uint64_t s : {10ull, 50ull, 310ull, 793ull}) {
    for (std::uint64_t f0 : {1ull, 7ull, 100ull, 1234ull, 99991ull, 1ull << 40}) {
      int k = p0_exponent_for(f0, s);
      unsigned __int128 lhs = static_cast<unsigned __int128>(s) << k;
      CHECK(lhs >= static_cast<unsigned __int128>(f0) * 2);
      if (k > 0)
        CHECK((static_cast<unsigned __int128>(s) << (k - 1)) <
              static_cast<unsigned __int128>(f0) * 2);
      if (f0 > s) {
        double guess = std::ldexp(double(f0), -k);
        CHECK(guess <= s / 2.0);
        CHECK(guess >= s / 4.0);
      }
    }
  }

  SizingResult r = bucket_limit(params(Variant::Cvm2, 0.5, 0.1, 1000));
  CHECK(r.p0(2000) == std::ldexp(1.0, -r.p0_exponent(2000)));
}
