#include "cutoff/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cutoff {

namespace {

// Round up, absorbing float noise at integer boundaries (the formulas are
// routinely evaluated at points designed to land exactly on an integer).
std::uint64_t ceil_to_count(double v) {
  double nudge = std::max(1e-9, std::fabs(v) * 1e-12);
  double c = std::ceil(v - nudge);
  if (c < 1.0) c = 1.0;
  return static_cast<std::uint64_t>(c);
}

void check_accuracy(double epsilon, double delta) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("sizing: epsilon must be in (0, 1]");
  if (!(delta > 0.0))
    throw std::invalid_argument("sizing: delta must be positive");
}

}  // namespace

int p0_exponent_for(std::uint64_t f0, std::uint64_t s) {
  if (s < 1) throw std::invalid_argument("p0_exponent_for: s must be >= 1");
  int k = 0;
  unsigned __int128 lhs = s;
  unsigned __int128 target = static_cast<unsigned __int128>(f0) * 2;
  while (lhs < target) {
    lhs <<= 1;
    ++k;
  }
  return k;
}

int SizingResult::p0_exponent(std::uint64_t f0) const {
  return p0_exponent_for(f0, s);
}

double SizingResult::p0(std::uint64_t f0) const {
  return std::ldexp(1.0, -p0_exponent(f0));
}

SizingResult bucket_limit(const SizingParams& p) {
  check_accuracy(p.epsilon, p.delta);
  if (p.m < 1) throw std::invalid_argument("sizing: m must be >= 1");
  if (p.n < 1) throw std::invalid_argument("sizing: n must be >= 1");
  double e2 = p.epsilon * p.epsilon;
  double md = static_cast<double>(p.m);
  SizingResult r;
  switch (p.variant) {
    case Variant::DonD:
      r.s = ceil_to_count(std::max(24.0 * std::log(4.0 * md / p.delta),
                                   (24.0 / e2) * std::log(96.0 / (e2 * p.delta))));
      r.formula = "max(24*ln(4m/delta), (24/eps^2)*ln(96/(eps^2*delta)))";
      break;
    case Variant::DonDPrime:
    case Variant::Cvm1:
    case Variant::Cvm2:
      r.s = ceil_to_count(std::max(24.0 * std::log(4.0 * md / p.delta),
                                   (6.0 / e2) * std::log(8.0 / p.delta)));
      r.formula = "max(24*ln(4m/delta), (6/eps^2)*ln(8/delta))";
      break;
    case Variant::Cvm2Refuse: {
      double nd = static_cast<double>(std::min(p.n, p.m));
      r.s = ceil_to_count(12.0 * std::log(4.0 * nd / p.delta) +
                          (6.0 / e2) * std::log(8.0 / p.delta));
      r.formula = "12*ln(4*min(n,m)/delta) + (6/eps^2)*ln(8/delta)";
      break;
    }
    case Variant::Tracking:
      r.s = ceil_to_count((12.0 / e2) * std::log(8.0 * md / p.delta));
      r.formula = "(12/eps^2)*ln(8m/delta)";
      break;
  }
  return r;
}

namespace {

double log_choose(std::uint64_t n, std::uint64_t x) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(x) + 1.0) -
         std::lgamma(static_cast<double>(n - x) + 1.0);
}

// sum_{x=lo..hi} C(n,x) p^x (1-p)^(n-x), accumulated in log space.
double binomial_mass(std::uint64_t n, double p, std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) return 0.0;
  double lp = std::log(p);        // finite: p > 0
  double lq = std::log1p(-p);     // -inf when p == 1
  double peak = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::uint64_t x = lo; x <= hi; ++x) {
    double term = log_choose(n, x);
    if (x > 0) term += static_cast<double>(x) * lp;
    if (n - x > 0) term += static_cast<double>(n - x) * lq;
    if (std::isinf(term) && term < 0.0) continue;  // exact zero mass
    if (term <= peak) {
      acc += std::exp(term - peak);
    } else {
      acc = acc * std::exp(peak - term) + 1.0;
      peak = term;
    }
  }
  if (std::isinf(peak)) return 0.0;
  return std::min(1.0, std::exp(peak + std::log(acc)));
}

void check_tail_args(std::uint64_t n, double p, double eps) {
  if (n < 1) throw std::invalid_argument("binomial tail: n must be >= 1");
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("binomial tail: p must be in (0, 1]");
  if (!(eps > 0.0) || eps > 1.0)
    throw std::invalid_argument("binomial tail: eps must be in (0, 1]");
}

}  // namespace

BinomialTail binomial_tail_lower(std::uint64_t n, double p, double eps) {
  check_tail_args(n, p, eps);
  double t = static_cast<double>(n) * p * (1.0 - eps);
  double nudge = std::max(1e-9, t * 1e-12);
  std::uint64_t hi = static_cast<std::uint64_t>(std::floor(t + nudge));
  BinomialTail out;
  out.exact = binomial_mass(n, p, 0, std::min(hi, n));
  out.bound = std::exp(-static_cast<double>(n) * p * eps * eps / 2.0);
  return out;
}

BinomialTail binomial_tail_upper(std::uint64_t n, double p, double eps) {
  check_tail_args(n, p, eps);
  double t = static_cast<double>(n) * p * (1.0 + eps);
  double nudge = std::max(1e-9, t * 1e-12);
  double lo_d = std::ceil(t - nudge);
  BinomialTail out;
  out.bound = std::exp(-static_cast<double>(n) * p * eps * eps / 3.0);
  if (lo_d > static_cast<double>(n)) {
    out.exact = 0.0;
    return out;
  }
  std::uint64_t lo = static_cast<std::uint64_t>(lo_d);
  out.exact = binomial_mass(n, p, lo, n);
  return out;
}

bool implication_check(std::uint64_t n, double p, double eps, double beta) {
  check_tail_args(n, p, eps);
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("implication_check: beta must be in (0, 1]");
  return static_cast<double>(n) * p >= 3.0 / (eps * eps) * std::log(1.0 / beta);
}

}  // namespace cutoff
