#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cutoff/sizing.hpp"
#include "cutoff/sketch.hpp"

namespace cutoff {

// Test-stream shapes with a declared distinct count.  The generators
// guarantee the declared value exactly: the Zipf generator patches its tail
// so every token appears at least once.
struct StreamSpec {
  enum class Kind { AllDistinct, Repeated, Zipf, Permuted };

  Kind kind = Kind::AllDistinct;
  std::uint64_t f0 = 1;
  std::uint64_t m = 1;             // Zipf length; other kinds derive theirs
  std::uint64_t reps = 1;          // Repeated
  double exponent = 1.0;           // Zipf
  std::uint64_t permute_seed = 0;  // Permuted
  std::shared_ptr<StreamSpec> base;  // Permuted wraps another spec

  static StreamSpec all_distinct(std::uint64_t f0);
  static StreamSpec repeated(std::uint64_t f0, std::uint64_t reps);
  static StreamSpec zipf(std::uint64_t f0, double exponent, std::uint64_t m);
  static StreamSpec permuted(StreamSpec base, std::uint64_t seed);

  std::uint64_t length() const;
  std::uint64_t declared_f0() const;
};

// Tokens are 1..f0.  Zipf draws consume rng; AllDistinct and Repeated are
// deterministic; Permuted shuffles its base with a generator keyed by the
// spec's own permute_seed.
std::vector<std::uint64_t> generate_stream(const StreamSpec& spec, Rng& rng);

std::uint64_t exact_f0(std::span<const std::uint64_t> stream);

struct LastOccurrences {
  std::vector<std::uint64_t> times;                          // sorted, 1-based
  std::unordered_map<std::uint64_t, std::uint64_t> by_element;
};
LastOccurrences last_occurrences(std::span<const std::uint64_t> stream);

// Fairness: at every step t, each element is on the list iff the score of
// its most recent appearance beats the current cutoff.  Requires a scored
// transcript; on failure reports the first violating step t and the
// appearance index j whose element breaks the biconditional.
struct FairnessCheck {
  bool ok = true;
  std::uint64_t t = 0;
  std::uint64_t j = 0;
};
FairnessCheck check_fair(const Transcript& tr,
                         std::span<const std::uint64_t> stream);

// Cutoffs never increase (p_0 = 1).
bool check_monotone(const Transcript& tr);

// Run the discrete max-score sketch on grid-uniform scores and its
// geometric-like twin on the same underlying uniforms (same seed, one draw
// per step), and check 'geo <= uniform <= 2 * geo' for every cutoff.
struct CouplingCheck {
  bool ok = true;
  std::uint64_t t = 0;  // first violating step
  Transcript uniform_side;
  Transcript geometric_side;
};
CouplingCheck coupled_dond_pair(std::span<const std::uint64_t> stream,
                                int n_prime, std::uint64_t s,
                                std::uint64_t seed);

// Replay a continuous-uniform max-score run with the scores of final
// appearances replaced by 0 for survivors and 1 for everyone else, and
// compare final cutoffs.  Exactly one of two outcomes must hold:
//   branch 1: p == p_sub and p_sub <= c, or
//   branch 2: p == c and c < p_sub,
// where c is the (x+1)-smallest final-appearance score and x the final list
// size.  Skipped when the stream has at most s distinct elements.
struct CreditSubstitutionReport {
  bool skipped = false;
  bool ok = false;
  int branch = 0;
  std::uint64_t x = 0;
  double c_next = 0.0;
  double p_final = 1.0;
  double p_final_substituted = 1.0;
};
CreditSubstitutionReport credit_substitution_check(
    std::span<const std::uint64_t> stream, std::uint64_t seed,
    std::uint64_t s);

struct Experiment {
  Variant variant = Variant::Cvm2;
  StreamSpec stream;
  std::optional<std::uint64_t> s;  // explicit bucket limit; otherwise sized
                                   // from (epsilon, delta) for the variant
  double epsilon = 0.5;            // also the failure band half-width
  double delta = 0.1;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::uint64_t n_cap = 0;  // 0 means unbounded
};

struct MonteCarloReport {
  std::uint64_t trials = 0;
  std::uint64_t f0 = 0;
  std::uint64_t s = 0;
  int p0_exp = 0;
  double mean_estimate = 0.0;   // over non-aborted trials
  double standard_error = 0.0;  // sample sd / sqrt(non-aborted trials)
  double empirical_bias = 0.0;  // mean - f0
  double failure_rate = 0.0;    // outside [(1-eps) f0, (1+eps) f0]; aborts count
  double abort_rate = 0.0;
  double p_small_rate = 0.0;    // final cutoff below p0(f0); aborts count
};

// Independent trials on one fixed generated stream.  The stream generator
// and each trial get their own derived generator (streams 0 and 1+i of the
// experiment seed), so reports are reproducible and order-insensitive.
MonteCarloReport monte_carlo(const Experiment& ex);

}  // namespace cutoff
