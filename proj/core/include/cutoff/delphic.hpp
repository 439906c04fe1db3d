#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "cutoff/sketch.hpp"

namespace cutoff {

// Sets the estimator can query without enumerating: constant-time
// cardinality, membership, and rank-indexed access to the i-th smallest
// element.  Tokens live in a 1-based universe: a range holds the values
// themselves; a cuboid over [1..n]^d holds points encoded in mixed radix,
// token = 1 + sum_j (x_j - 1) * n^(d-j), so a one-dimensional cuboid agrees
// with the equal range.
struct RangeSet {
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;  // inclusive; requires 1 <= lo <= hi
};

struct Interval {
  std::uint64_t a = 1;
  std::uint64_t b = 1;  // inclusive; requires 1 <= a <= b <= n
};

struct CuboidSet {
  std::vector<Interval> dims;
  std::uint64_t n = 1;  // per-dimension universe bound; n^d must fit 64 bits
};

using DelphicSet = std::variant<RangeSet, CuboidSet>;

void validate_set(const DelphicSet& s);  // throws on a malformed set

std::uint64_t cardinality(const DelphicSet& s);
bool contains(const DelphicSet& s, std::uint64_t token);

// 1-indexed, ascending token order; the last cuboid dimension varies
// fastest.  Throws when i is 0 or exceeds the cardinality.
std::uint64_t pick(const DelphicSet& s, std::uint64_t i);
std::vector<std::uint64_t> pick_coords(const CuboidSet& s, std::uint64_t i);

enum class GeoMode {
  DebugScan,      // count Bernoulli(p) draws to the first success; one draw
                  // per candidate, bit-couplable with per-element processing
  FastInversion,  // one uniform draw inverted through the geometric CDF
};

// First success time of a Bernoulli(p) process, support {1, 2, ...}.
std::uint64_t sample_geometric(Rng& rng, double p, GeoMode mode);

// One set-stream update of a Bernoulli-form refuse sketch: drop stored
// members of s, then walk s by geometric jumps under the current cutoff,
// inserting each visited element and resolving overflows as it goes (a
// refused element still advances the walk).  Counts as one step.
void process_set(Sketch& sk, const DelphicSet& s, GeoMode mode);

struct SetStreamConfig {
  std::uint64_t bucket_limit = 1;
  std::uint64_t seed = 0;
  GeoMode geo = GeoMode::FastInversion;
  bool trace = false;
};

// Estimate the number of distinct elements in a union of sets.
RunOutput run_set_stream(const SetStreamConfig& cfg,
                         std::span<const DelphicSet> sets,
                         std::uint64_t n_cap, std::uint64_t m_cap);

}  // namespace cutoff
