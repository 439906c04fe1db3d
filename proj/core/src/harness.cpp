#include "cutoff/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace cutoff {

StreamSpec StreamSpec::all_distinct(std::uint64_t f0) {
  StreamSpec s;
  s.kind = Kind::AllDistinct;
  s.f0 = f0;
  s.m = f0;
  return s;
}

StreamSpec StreamSpec::repeated(std::uint64_t f0, std::uint64_t reps) {
  if (reps < 1) throw std::invalid_argument("StreamSpec: reps must be >= 1");
  StreamSpec s;
  s.kind = Kind::Repeated;
  s.f0 = f0;
  s.reps = reps;
  s.m = f0 * reps;
  return s;
}

StreamSpec StreamSpec::zipf(std::uint64_t f0, double exponent, std::uint64_t m) {
  if (f0 < 1) throw std::invalid_argument("StreamSpec: zipf needs f0 >= 1");
  if (m < f0) throw std::invalid_argument("StreamSpec: zipf needs m >= f0");
  if (!(exponent >= 0.0)) throw std::invalid_argument("StreamSpec: zipf exponent must be >= 0");
  StreamSpec s;
  s.kind = Kind::Zipf;
  s.f0 = f0;
  s.m = m;
  s.exponent = exponent;
  return s;
}

StreamSpec StreamSpec::permuted(StreamSpec base, std::uint64_t seed) {
  StreamSpec s;
  s.kind = Kind::Permuted;
  s.base = std::make_shared<StreamSpec>(std::move(base));
  s.f0 = s.base->declared_f0();
  s.m = s.base->length();
  s.permute_seed = seed;
  return s;
}

std::uint64_t StreamSpec::length() const {
  switch (kind) {
    case Kind::AllDistinct: return f0;
    case Kind::Repeated: return f0 * reps;
    case Kind::Zipf: return m;
    case Kind::Permuted: return base ? base->length() : 0;
  }
  return 0;
}

std::uint64_t StreamSpec::declared_f0() const {
  if (kind == Kind::Permuted) return base ? base->declared_f0() : 0;
  return f0;
}

std::vector<std::uint64_t> generate_stream(const StreamSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case StreamSpec::Kind::AllDistinct: {
      std::vector<std::uint64_t> v(spec.f0);
      for (std::uint64_t i = 0; i < spec.f0; ++i) v[i] = i + 1;
      return v;
    }
    case StreamSpec::Kind::Repeated: {
      std::vector<std::uint64_t> v;
      v.reserve(spec.f0 * spec.reps);
      for (std::uint64_t r = 0; r < spec.reps; ++r)
        for (std::uint64_t i = 0; i < spec.f0; ++i) v.push_back(i + 1);
      return v;
    }
    case StreamSpec::Kind::Zipf: {
      std::vector<double> cum(spec.f0);
      double total = 0.0;
      for (std::uint64_t r = 1; r <= spec.f0; ++r) {
        total += std::pow(static_cast<double>(r), -spec.exponent);
        cum[r - 1] = total;
      }
      std::vector<std::uint64_t> v(spec.m);
      for (std::uint64_t i = 0; i < spec.m; ++i) {
        double u = rng.next_unit53() * total;
        auto it = std::lower_bound(cum.begin(), cum.end(), u);
        std::uint64_t rank = static_cast<std::uint64_t>(it - cum.begin());
        if (rank >= spec.f0) rank = spec.f0 - 1;
        v[i] = rank + 1;
      }
      // Patch in every missing token, overwriting duplicates from the tail
      // so the length stays m and the distinct count is exactly f0.
      std::unordered_map<std::uint64_t, std::uint64_t> count;
      for (std::uint64_t a : v) count[a] += 1;
      std::vector<std::uint64_t> missing;
      for (std::uint64_t a = 1; a <= spec.f0; ++a)
        if (count.find(a) == count.end()) missing.push_back(a);
      std::size_t next = 0;
      for (std::size_t i = v.size(); i-- > 0 && next < missing.size();) {
        auto it = count.find(v[i]);
        if (it->second > 1) {
          it->second -= 1;
          v[i] = missing[next++];
        }
      }
      return v;
    }
    case StreamSpec::Kind::Permuted: {
      if (!spec.base) throw std::invalid_argument("StreamSpec: permuted without a base");
      std::vector<std::uint64_t> v = generate_stream(*spec.base, rng);
      Rng prm(spec.permute_seed);
      for (std::size_t i = v.size(); i-- > 1;)
        std::swap(v[i], v[prm.next_u64() % (i + 1)]);
      return v;
    }
  }
  throw std::logic_error("generate_stream: bad kind");
}

std::uint64_t exact_f0(std::span<const std::uint64_t> stream) {
  std::unordered_set<std::uint64_t> seen(stream.begin(), stream.end());
  return seen.size();
}

LastOccurrences last_occurrences(std::span<const std::uint64_t> stream) {
  LastOccurrences out;
  for (std::size_t i = 0; i < stream.size(); ++i)
    out.by_element[stream[i]] = i + 1;
  out.times.reserve(out.by_element.size());
  for (const auto& [elem, t] : out.by_element) out.times.push_back(t);
  std::sort(out.times.begin(), out.times.end());
  return out;
}

namespace {

// True when prev and cur hold the same ids apart from the presence or
// absence of `moved` on either side.
bool equal_except(const std::vector<std::uint64_t>& prev,
                  const std::vector<std::uint64_t>& cur, std::uint64_t moved) {
  std::size_t i = 0, j = 0;
  while (i < prev.size() || j < cur.size()) {
    if (i < prev.size() && prev[i] == moved) { ++i; continue; }
    if (j < cur.size() && cur[j] == moved) { ++j; continue; }
    if (i >= prev.size() || j >= cur.size() || prev[i] != cur[j]) return false;
    ++i; ++j;
  }
  return true;
}

}  // namespace

FairnessCheck check_fair(const Transcript& tr,
                         std::span<const std::uint64_t> stream) {
  if (tr.steps.size() > stream.size())
    throw std::invalid_argument("check_fair: transcript longer than stream");
  std::unordered_map<std::uint64_t, std::uint64_t> last;  // element -> step
  std::vector<double> score_at(tr.steps.size() + 1, 0.0);
  double prev_cutoff = 1.0;
  std::vector<std::uint64_t> prev_members;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const TranscriptStep& st = tr.steps[i];
    if (!st.score)
      throw std::invalid_argument("check_fair: transcript lacks scores");
    std::uint64_t t = i + 1;
    std::uint64_t a = stream[i];
    score_at[t] = *st.score;
    last[a] = t;
    auto member = [&](std::uint64_t id) {
      return std::binary_search(st.members.begin(), st.members.end(), id);
    };
    // A step that kept the cutoff can only have touched a's entry; anything
    // else triggers a full re-check of every last appearance so far.
    if (st.cutoff == prev_cutoff && equal_except(prev_members, st.members, a)) {
      if (member(a) != (score_at[t] < st.cutoff)) return {false, t, t};
    } else {
      for (const auto& [elem, j] : last)
        if (member(elem) != (score_at[j] < st.cutoff)) return {false, t, j};
    }
    prev_cutoff = st.cutoff;
    prev_members = st.members;
  }
  return {};
}

bool check_monotone(const Transcript& tr) {
  double prev = 1.0;
  for (const TranscriptStep& st : tr.steps) {
    if (st.cutoff > prev) return false;
    prev = st.cutoff;
  }
  return true;
}

CouplingCheck coupled_dond_pair(std::span<const std::uint64_t> stream,
                                int n_prime, std::uint64_t s,
                                std::uint64_t seed) {
  RunOutput uni = run(SketchConfig::dond_disc(n_prime, s), seed, stream,
                      UINT64_MAX, stream.size(), true);
  RunOutput geo = run(SketchConfig::dond_prime_disc(n_prime, s), seed, stream,
                      UINT64_MAX, stream.size(), true);
  CouplingCheck out;
  out.uniform_side = std::move(uni.transcript);
  out.geometric_side = std::move(geo.transcript);
  for (std::size_t i = 0; i < out.uniform_side.steps.size(); ++i) {
    double p = out.uniform_side.steps[i].cutoff;
    double pg = out.geometric_side.steps[i].cutoff;
    if (!(pg <= p && p <= 2.0 * pg)) {
      out.ok = false;
      out.t = i + 1;
      return out;
    }
  }
  return out;
}

CreditSubstitutionReport credit_substitution_check(
    std::span<const std::uint64_t> stream, std::uint64_t seed,
    std::uint64_t s) {
  SketchConfig cfg = SketchConfig::for_variant(Variant::DonD, s);
  RunOutput orig = run(cfg, seed, stream, UINT64_MAX, stream.size(), true);
  CreditSubstitutionReport r;
  if (exact_f0(stream) <= s) {
    r.skipped = true;  // the cutoff can stay at 1 and the claim is vacuous
    return r;
  }
  const TranscriptStep& last_step = orig.transcript.steps.back();
  const std::vector<std::uint64_t>& survivors = last_step.members;
  r.x = survivors.size();
  r.p_final = last_step.cutoff;

  LastOccurrences lo = last_occurrences(stream);
  std::vector<double> credits;
  credits.reserve(lo.times.size());
  for (std::uint64_t j : lo.times)
    credits.push_back(*orig.transcript.steps[j - 1].score);
  std::sort(credits.begin(), credits.end());
  r.c_next = credits[r.x];  // (x+1)-smallest; x < f0 since f0 > s >= x

  std::unordered_set<std::uint64_t> in_set(survivors.begin(), survivors.end());
  Sketch sub(cfg, seed);  // scores are injected; its generator is never used
  for (std::size_t i = 0; i < stream.size(); ++i) {
    std::uint64_t a = stream[i];
    double q = *orig.transcript.steps[i].score;
    if (lo.by_element[a] == i + 1)
      q = in_set.count(a) ? 0.0 : 1.0;
    sub.step_with_score(a, q);
  }
  r.p_final_substituted = sub.cutoff();

  bool branch1 = r.p_final == r.p_final_substituted && r.p_final_substituted <= r.c_next;
  bool branch2 = r.p_final == r.c_next && r.c_next < r.p_final_substituted;
  r.ok = branch1 != branch2;
  r.branch = branch1 ? 1 : (branch2 ? 2 : 0);
  return r;
}

MonteCarloReport monte_carlo(const Experiment& ex) {
  if (ex.trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  Rng root(ex.seed);
  Rng stream_rng = root.split(0);
  std::vector<std::uint64_t> stream = generate_stream(ex.stream, stream_rng);
  std::uint64_t n_cap = ex.n_cap ? ex.n_cap : UINT64_MAX;

  MonteCarloReport rep;
  rep.trials = ex.trials;
  rep.f0 = exact_f0(stream);
  if (ex.s) {
    rep.s = *ex.s;
  } else {
    SizingParams sp;
    sp.epsilon = ex.epsilon;
    sp.delta = ex.delta;
    sp.m = std::max<std::uint64_t>(1, stream.size());
    sp.n = n_cap;
    sp.variant = ex.variant;
    rep.s = bucket_limit(sp).s;
  }
  rep.p0_exp = p0_exponent_for(rep.f0, rep.s);
  double p0 = std::ldexp(1.0, -rep.p0_exp);

  SketchConfig cfg = SketchConfig::for_variant(ex.variant, rep.s);
  double lo_band = (1.0 - ex.epsilon) * static_cast<double>(rep.f0);
  double hi_band = (1.0 + ex.epsilon) * static_cast<double>(rep.f0);

  std::uint64_t aborts = 0, fails = 0, small = 0, completed = 0;
  double sum = 0.0, sumsq = 0.0;
  for (std::uint64_t i = 0; i < ex.trials; ++i) {
    RunOutput out = run(cfg, root.split(1 + i), stream, n_cap, stream.size());
    if (out.report.status == Status::Aborted) {
      aborts += 1;
      fails += 1;
      small += 1;
      continue;
    }
    completed += 1;
    double est = out.report.estimate;
    sum += est;
    sumsq += est * est;
    if (est < lo_band || est > hi_band) fails += 1;
    if (out.report.final_cutoff < p0) small += 1;
  }

  if (completed > 0) rep.mean_estimate = sum / static_cast<double>(completed);
  if (completed > 1) {
    double var = (sumsq - sum * sum / static_cast<double>(completed)) /
                 static_cast<double>(completed - 1);
    if (var < 0.0) var = 0.0;
    rep.standard_error = std::sqrt(var / static_cast<double>(completed));
  }
  rep.empirical_bias = rep.mean_estimate - static_cast<double>(rep.f0);
  rep.failure_rate = static_cast<double>(fails) / static_cast<double>(ex.trials);
  rep.abort_rate = static_cast<double>(aborts) / static_cast<double>(ex.trials);
  rep.p_small_rate = static_cast<double>(small) / static_cast<double>(ex.trials);
  return rep;
}

}  // namespace cutoff
