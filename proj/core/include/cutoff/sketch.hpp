#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cutoff/score_dist.hpp"

namespace cutoff {

// How the cutoff is lowered when the list overflows to s+1 entries:
//   MaxScr    - new cutoff is the largest stored score; filtering then drops
//               at least that entry, so a single application always fits.
//   Cvm1Halve - halve only if the largest stored score is exactly half the
//               cutoff; otherwise the sketch aborts.
//   Cvm2Halve - halve; a single halving may shed nothing, so the plain step
//               repeats it until the list fits, while the refuse step applies
//               it once and drops the newest entry if the list is still full.
enum class UpdateRule { MaxScr, Cvm1Halve, Cvm2Halve };

enum class Status { Running, Aborted };

// Named configurations.  Tracking is a sizing rule, not a distinct state
// machine: it runs the refuse sketch with a larger bucket limit.
enum class Variant { DonD, DonDPrime, Cvm1, Cvm2, Cvm2Refuse, Tracking };

const char* variant_name(Variant v);

// Element -> stored score, capacity bounded by the bucket limit s: at most
// s+1 entries mid-step, at most s between steps.  Entries are kept ordered
// by element id so that per-entry randomness is drawn in a canonical order.
class CutoffList {
 public:
  using Map = std::map<std::uint64_t, double>;

  bool remove(std::uint64_t a);                    // true if a was present
  void insert(std::uint64_t a, double q);          // a must not be present
  void filter_below(double p);                     // keep entries with q < p
  double max_score() const;                        // error when empty
  void restamp_all(double p);                      // overwrite every stored value

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(std::uint64_t a) const { return entries_.count(a) != 0; }
  const Map& entries() const { return entries_; }
  std::vector<std::uint64_t> members() const;      // ascending element ids

  void set_marked(std::uint64_t a) { marked_ = a; }
  void clear_marked() { marked_.reset(); }
  std::optional<std::uint64_t> marked() const { return marked_; }

 private:
  Map entries_;
  std::optional<std::uint64_t> marked_;  // the entry inserted by the current step
};

struct SketchConfig {
  ScoreDistribution dist = ScoreDistribution::continuous_uniform();
  UpdateRule rule = UpdateRule::MaxScr;
  std::uint64_t bucket_limit = 1;  // s >= 1
  bool refuse = false;             // drop the newest entry instead of looping
  bool bernoulli_form = false;     // insertion by a Ber(cutoff) coin; stored
                                   // values are insertion cutoffs, and the
                                   // estimate divides by the cutoff itself

  static SketchConfig for_variant(Variant v, std::uint64_t s);
  static SketchConfig dond_disc(int bits, std::uint64_t s);          // uniform on the 2^bits grid
  static SketchConfig dond_prime_disc(int n_prime, std::uint64_t s); // truncated geometric-like

  void validate() const;
};

// Per-step record: the step index, the score drawn (absent for the
// Bernoulli forms and set steps), the cutoff after the step, and the sorted
// element set after the step.
struct TranscriptStep {
  std::uint64_t t = 0;
  std::optional<double> score;
  double cutoff = 1.0;
  std::vector<std::uint64_t> members;
};

struct Transcript {
  std::vector<TranscriptStep> steps;
};

struct EstimateReport {
  double estimate = 0.0;
  double final_cutoff = 1.0;
  std::uint64_t final_list_size = 0;
  Status status = Status::Running;
  std::uint64_t steps_processed = 0;
};

class Sketch {
 public:
  Sketch(const SketchConfig& cfg, std::uint64_t seed);
  Sketch(const SketchConfig& cfg, Rng rng);

  // Plain step: draw a score, re-insert the element if it beats the cutoff,
  // and lower the cutoff when the list overflows.  Throws after an abort.
  void step(std::uint64_t a);

  // Same, but the overflow rule is applied once and the newest entry is
  // refused if the list is still over the limit.  Not defined for Cvm1Halve.
  void step_refuse(std::uint64_t a);

  // Bernoulli form: keep the element with probability cutoff (no scores);
  // on overflow every entry independently survives a fair coin and the
  // cutoff halves.  With refuse enabled this is applied once and the newest
  // entry is refused if nothing was shed; otherwise it repeats until the
  // list fits.  Never aborts.
  void cvm2_refuse_step(std::uint64_t a);

  // Dispatch to the configured step kind.
  void process(std::uint64_t a);

  // Deterministic transition on a supplied score; the random step is exactly
  // step_with_score(a, sample_score(dist, rng)).  Scores outside the
  // distribution's support are permitted (substitution experiments).
  void step_with_score(std::uint64_t a, double q);
  void step_refuse_with_score(std::uint64_t a, double q);

  // 0 for an empty list, |L|/mass([0, cutoff)) when that mass is positive,
  // min(n_cap, m_cap) otherwise.  Throws after an abort.
  EstimateReport estimate(std::uint64_t n_cap, std::uint64_t m_cap) const;

  const CutoffList& list() const { return list_; }
  double cutoff() const { return cutoff_; }
  Status status() const { return status_; }
  std::uint64_t steps() const { return t_; }
  const SketchConfig& config() const { return cfg_; }

  void enable_trace() { trace_ = true; }
  const Transcript& transcript() const { return transcript_; }
  std::uint64_t draws_consumed() const { return rng_.draws_consumed(); }

  // Building blocks for estimators that drive the Bernoulli form directly
  // (the stream-of-sets estimator).  A set step brackets its work with
  // begin/end so it counts as one step and yields one transcript record.
  Rng& rng() { return rng_; }
  void begin_set_step();
  void end_set_step();
  void remove_entry(std::uint64_t a) { list_.remove(a); }
  void insert_marked(std::uint64_t a);
  // Single fair-coin downsample + halving if the list stands at s+1, with
  // the configured refuse/loop behavior.  No-op below s+1.
  void resolve_overflow_bernoulli();

 private:
  void require_running() const;
  void finish_step(std::optional<double> score);
  void apply_overflow_rule(std::uint64_t a, bool single_application);

  SketchConfig cfg_;
  Rng rng_;
  CutoffList list_;
  double cutoff_ = 1.0;
  std::uint64_t t_ = 0;
  Status status_ = Status::Running;
  bool trace_ = false;
  Transcript transcript_;
};

struct RunOutput {
  EstimateReport report;
  Transcript transcript;  // empty unless trace was requested
};

// Fold the configured step over the stream, stopping early on abort.
RunOutput run(const SketchConfig& cfg, std::uint64_t seed,
              std::span<const std::uint64_t> stream, std::uint64_t n_cap,
              std::uint64_t m_cap, bool trace = false);
RunOutput run(const SketchConfig& cfg, Rng rng,
              std::span<const std::uint64_t> stream, std::uint64_t n_cap,
              std::uint64_t m_cap, bool trace = false);

}  // namespace cutoff
