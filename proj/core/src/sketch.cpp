#include "cutoff/sketch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cutoff {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::DonD: return "dond";
    case Variant::DonDPrime: return "dondp";
    case Variant::Cvm1: return "cvm1";
    case Variant::Cvm2: return "cvm2";
    case Variant::Cvm2Refuse: return "cvm2refuse";
    case Variant::Tracking: return "tracking";
  }
  return "?";
}

bool CutoffList::remove(std::uint64_t a) {
  bool present = entries_.erase(a) != 0;
  if (present && marked_ && *marked_ == a) marked_.reset();
  return present;
}

void CutoffList::insert(std::uint64_t a, double q) {
  if (!entries_.emplace(a, q).second)
    throw std::logic_error("CutoffList::insert: element already present");
}

void CutoffList::filter_below(double p) {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second < p) ++it;
    else it = entries_.erase(it);
  }
  if (marked_ && entries_.count(*marked_) == 0) marked_.reset();
}

double CutoffList::max_score() const {
  if (entries_.empty()) throw std::runtime_error("CutoffList::max_score: empty list");
  double m = 0.0;
  for (const auto& [id, q] : entries_)
    if (q > m) m = q;
  return m;
}

std::vector<std::uint64_t> CutoffList::members() const {
  std::vector<std::uint64_t> out;
  out.reserve(entries_.size());
  for (const auto& [id, q] : entries_) out.push_back(id);
  return out;
}

void CutoffList::restamp_all(double p) {
  for (auto& [id, q] : entries_) q = p;
}

SketchConfig SketchConfig::for_variant(Variant v, std::uint64_t s) {
  SketchConfig cfg;
  cfg.bucket_limit = s;
  switch (v) {
    case Variant::DonD:
      cfg.dist = ScoreDistribution::continuous_uniform();
      cfg.rule = UpdateRule::MaxScr;
      break;
    case Variant::DonDPrime:
      cfg.dist = ScoreDistribution::geo_like_infinite();
      cfg.rule = UpdateRule::MaxScr;
      break;
    case Variant::Cvm1:
      cfg.dist = ScoreDistribution::geo_like_infinite();
      cfg.rule = UpdateRule::Cvm1Halve;
      break;
    case Variant::Cvm2:
      cfg.dist = ScoreDistribution::geo_like_infinite();
      cfg.rule = UpdateRule::Cvm2Halve;
      break;
    case Variant::Cvm2Refuse:
    case Variant::Tracking:
      cfg.dist = ScoreDistribution::geo_like_infinite();  // unused in this form
      cfg.rule = UpdateRule::Cvm2Halve;
      cfg.refuse = true;
      cfg.bernoulli_form = true;
      break;
  }
  cfg.validate();
  return cfg;
}

SketchConfig SketchConfig::dond_disc(int bits, std::uint64_t s) {
  SketchConfig cfg;
  cfg.dist = ScoreDistribution::discrete_uniform(1ULL << bits);
  cfg.rule = UpdateRule::MaxScr;
  cfg.bucket_limit = s;
  cfg.validate();
  return cfg;
}

SketchConfig SketchConfig::dond_prime_disc(int n_prime, std::uint64_t s) {
  SketchConfig cfg;
  cfg.dist = ScoreDistribution::geo_like_finite(n_prime);
  cfg.rule = UpdateRule::MaxScr;
  cfg.bucket_limit = s;
  cfg.validate();
  return cfg;
}

void SketchConfig::validate() const {
  if (bucket_limit < 1)
    throw std::invalid_argument("SketchConfig: bucket_limit must be >= 1");
  if (refuse && rule == UpdateRule::Cvm1Halve)
    throw std::invalid_argument("SketchConfig: refuse is undefined for Cvm1Halve");
  if (bernoulli_form && rule != UpdateRule::Cvm2Halve)
    throw std::invalid_argument("SketchConfig: bernoulli form requires Cvm2Halve");
}

Sketch::Sketch(const SketchConfig& cfg, std::uint64_t seed)
    : Sketch(cfg, Rng(seed)) {}

Sketch::Sketch(const SketchConfig& cfg, Rng rng) : cfg_(cfg), rng_(rng) {
  cfg_.validate();
}

void Sketch::require_running() const {
  if (status_ != Status::Running)
    throw std::runtime_error("Sketch: step after abort");
}

void Sketch::finish_step(std::optional<double> score) {
  t_ += 1;
  if (trace_)
    transcript_.steps.push_back({t_, score, cutoff_, list_.members()});
}

void Sketch::apply_overflow_rule(std::uint64_t a, bool single_application) {
  (void)a;
  switch (cfg_.rule) {
    case UpdateRule::MaxScr:
      cutoff_ = list_.max_score();
      list_.filter_below(cutoff_);  // sheds at least the max entry
      break;
    case UpdateRule::Cvm1Halve: {
      double half = cutoff_ / 2.0;
      if (list_.max_score() == half) {
        cutoff_ = half;
        list_.filter_below(half);
      } else {
        status_ = Status::Aborted;
      }
      break;
    }
    case UpdateRule::Cvm2Halve:
      do {
        cutoff_ /= 2.0;
        list_.filter_below(cutoff_);
      } while (!single_application && list_.size() > cfg_.bucket_limit);
      break;
  }
}

void Sketch::step_with_score(std::uint64_t a, double q) {
  require_running();
  if (cfg_.bernoulli_form)
    throw std::logic_error("Sketch: score step on a Bernoulli-form config");
  if (q < 0.0 || q > 1.0)
    throw std::invalid_argument("Sketch: score outside [0, 1]");
  list_.clear_marked();
  list_.remove(a);
  if (q < cutoff_) {
    list_.insert(a, q);
    list_.set_marked(a);
  }
  if (list_.size() > cfg_.bucket_limit) {
    apply_overflow_rule(a, /*single_application=*/false);
    if (status_ == Status::Aborted) return;  // step not completed
  }
  finish_step(q);
}

void Sketch::step_refuse_with_score(std::uint64_t a, double q) {
  require_running();
  if (cfg_.bernoulli_form)
    throw std::logic_error("Sketch: score step on a Bernoulli-form config");
  if (cfg_.rule == UpdateRule::Cvm1Halve)
    throw std::logic_error("Sketch: refuse step is undefined for Cvm1Halve");
  if (q < 0.0 || q > 1.0)
    throw std::invalid_argument("Sketch: score outside [0, 1]");
  list_.clear_marked();
  list_.remove(a);
  if (q < cutoff_) {
    list_.insert(a, q);
    list_.set_marked(a);
  }
  if (list_.size() > cfg_.bucket_limit) {
    apply_overflow_rule(a, /*single_application=*/true);
    // Nothing shed: refuse the entry this step added (it must still be there).
    if (list_.size() > cfg_.bucket_limit) list_.remove(a);
  }
  finish_step(q);
}

void Sketch::step(std::uint64_t a) {
  step_with_score(a, sample_score(cfg_.dist, rng_));
}

void Sketch::step_refuse(std::uint64_t a) {
  step_refuse_with_score(a, sample_score(cfg_.dist, rng_));
}

void Sketch::cvm2_refuse_step(std::uint64_t a) {
  require_running();
  if (!cfg_.bernoulli_form)
    throw std::logic_error("Sketch: Bernoulli step on a score-form config");
  bool keep = rng_.bernoulli(cutoff_);
  list_.clear_marked();
  list_.remove(a);
  if (keep) {
    list_.insert(a, cutoff_);
    list_.set_marked(a);
    resolve_overflow_bernoulli();
  }
  finish_step(std::nullopt);
}

void Sketch::resolve_overflow_bernoulli() {
  while (list_.size() > cfg_.bucket_limit) {
    // One fair coin per entry, in ascending element order; survivors carry
    // the halved cutoff as their stored value.
    std::vector<std::uint64_t> dropped;
    for (const auto& [id, q] : list_.entries())
      if (!rng_.bernoulli(0.5)) dropped.push_back(id);
    cutoff_ /= 2.0;
    std::optional<std::uint64_t> newcomer = list_.marked();
    for (std::uint64_t id : dropped) list_.remove(id);
    list_.restamp_all(cutoff_);
    if (cfg_.refuse) {
      if (list_.size() > cfg_.bucket_limit && newcomer) list_.remove(*newcomer);
      break;  // single application
    }
  }
}

void Sketch::process(std::uint64_t a) {
  if (cfg_.bernoulli_form) cvm2_refuse_step(a);
  else if (cfg_.refuse) step_refuse(a);
  else step(a);
}

void Sketch::begin_set_step() {
  require_running();
  list_.clear_marked();
}

void Sketch::end_set_step() { finish_step(std::nullopt); }

void Sketch::insert_marked(std::uint64_t a) {
  list_.insert(a, cutoff_);
  list_.set_marked(a);
}

EstimateReport Sketch::estimate(std::uint64_t n_cap, std::uint64_t m_cap) const {
  if (status_ == Status::Aborted)
    throw std::runtime_error("Sketch: estimate after abort");
  EstimateReport r;
  r.final_cutoff = cutoff_;
  r.final_list_size = list_.size();
  r.status = status_;
  r.steps_processed = t_;
  if (list_.empty()) {
    r.estimate = 0.0;
    return r;
  }
  double divisor =
      cfg_.bernoulli_form ? cutoff_ : cdf_below(cfg_.dist, cutoff_);
  if (divisor > 0.0)
    r.estimate = static_cast<double>(list_.size()) / divisor;
  else
    r.estimate = static_cast<double>(n_cap < m_cap ? n_cap : m_cap);
  return r;
}

RunOutput run(const SketchConfig& cfg, std::uint64_t seed,
              std::span<const std::uint64_t> stream, std::uint64_t n_cap,
              std::uint64_t m_cap, bool trace) {
  return run(cfg, Rng(seed), stream, n_cap, m_cap, trace);
}

RunOutput run(const SketchConfig& cfg, Rng rng,
              std::span<const std::uint64_t> stream, std::uint64_t n_cap,
              std::uint64_t m_cap, bool trace) {
  cfg.validate();
  Sketch sk(cfg, rng);
  if (trace) sk.enable_trace();
  for (std::uint64_t a : stream) {
    sk.process(a);
    if (sk.status() == Status::Aborted) break;
  }
  RunOutput out;
  out.transcript = sk.transcript();
  if (sk.status() == Status::Aborted) {
    out.report.estimate = std::numeric_limits<double>::quiet_NaN();
    out.report.final_cutoff = sk.cutoff();
    out.report.final_list_size = sk.list().size();
    out.report.status = Status::Aborted;
    out.report.steps_processed = sk.steps();
  } else {
    out.report = sk.estimate(n_cap, m_cap);
  }
  return out;
}

}  // namespace cutoff
