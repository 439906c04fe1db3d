#include "cutoff/delphic.hpp"

#include <cmath>
#include <stdexcept>

namespace cutoff {

namespace {

std::uint64_t cuboid_token_space(const CuboidSet& c) {
  unsigned __int128 space = 1;
  for (std::size_t j = 0; j < c.dims.size(); ++j) {
    space *= c.n;
    if (space > static_cast<unsigned __int128>(UINT64_MAX))
      throw std::invalid_argument("CuboidSet: n^d does not fit 64-bit tokens");
  }
  return static_cast<std::uint64_t>(space);
}

}  // namespace

void validate_set(const DelphicSet& s) {
  if (const auto* r = std::get_if<RangeSet>(&s)) {
    if (r->lo < 1 || r->lo > r->hi)
      throw std::invalid_argument("RangeSet: requires 1 <= lo <= hi");
    return;
  }
  const auto& c = std::get<CuboidSet>(s);
  if (c.dims.empty()) throw std::invalid_argument("CuboidSet: no dimensions");
  if (c.n < 1) throw std::invalid_argument("CuboidSet: n must be >= 1");
  cuboid_token_space(c);
  for (const Interval& iv : c.dims)
    if (iv.a < 1 || iv.a > iv.b || iv.b > c.n)
      throw std::invalid_argument("CuboidSet: requires 1 <= a <= b <= n");
}

std::uint64_t cardinality(const DelphicSet& s) {
  if (const auto* r = std::get_if<RangeSet>(&s)) return r->hi - r->lo + 1;
  const auto& c = std::get<CuboidSet>(s);
  std::uint64_t card = 1;
  for (const Interval& iv : c.dims) card *= iv.b - iv.a + 1;
  return card;
}

bool contains(const DelphicSet& s, std::uint64_t token) {
  if (const auto* r = std::get_if<RangeSet>(&s))
    return token >= r->lo && token <= r->hi;
  const auto& c = std::get<CuboidSet>(s);
  if (token == 0) return false;
  std::uint64_t z = token - 1;
  std::size_t d = c.dims.size();
  // Decode from the fastest (last) dimension outward.
  std::vector<std::uint64_t> coord(d);
  for (std::size_t j = d; j-- > 0;) {
    coord[j] = z % c.n + 1;
    z /= c.n;
  }
  if (z != 0) return false;  // beyond [1..n]^d
  for (std::size_t j = 0; j < d; ++j)
    if (coord[j] < c.dims[j].a || coord[j] > c.dims[j].b) return false;
  return true;
}

std::vector<std::uint64_t> pick_coords(const CuboidSet& c, std::uint64_t i) {
  DelphicSet s = c;
  std::uint64_t card = cardinality(s);
  if (i < 1 || i > card)
    throw std::out_of_range("pick: index outside [1, cardinality]");
  std::size_t d = c.dims.size();
  std::vector<std::uint64_t> coord(d);
  std::uint64_t z = i - 1;
  for (std::size_t j = d; j-- > 0;) {
    std::uint64_t w = c.dims[j].b - c.dims[j].a + 1;
    coord[j] = c.dims[j].a + z % w;
    z /= w;
  }
  return coord;
}

std::uint64_t pick(const DelphicSet& s, std::uint64_t i) {
  if (const auto* r = std::get_if<RangeSet>(&s)) {
    if (i < 1 || i > r->hi - r->lo + 1)
      throw std::out_of_range("pick: index outside [1, cardinality]");
    return r->lo + (i - 1);
  }
  const auto& c = std::get<CuboidSet>(s);
  std::vector<std::uint64_t> coord = pick_coords(c, i);
  std::uint64_t z = 0;
  for (std::size_t j = 0; j < coord.size(); ++j) z = z * c.n + (coord[j] - 1);
  return z + 1;
}

std::uint64_t sample_geometric(Rng& rng, double p, GeoMode mode) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("sample_geometric: p must be in (0, 1]");
  if (mode == GeoMode::DebugScan) {
    std::uint64_t k = 1;
    while (!rng.bernoulli(p)) ++k;
    return k;
  }
  double u = rng.next_unit53();
  while (u == 0.0) u = rng.next_unit53();
  if (p == 1.0) return 1;
  double k = std::floor(std::log(u) / std::log1p(-p)) + 1.0;
  if (k < 1.0) k = 1.0;
  if (k > 0x1.0p62) return 1ULL << 62;  // callers clamp against the set size
  return static_cast<std::uint64_t>(k);
}

namespace {

void visit_element(Sketch& sk, const DelphicSet& s, std::uint64_t idx) {
  sk.insert_marked(pick(s, idx));
  sk.resolve_overflow_bernoulli();
}

}  // namespace

void process_set(Sketch& sk, const DelphicSet& s, GeoMode mode) {
  if (!sk.config().bernoulli_form || !sk.config().refuse)
    throw std::logic_error("process_set: sketch must be a Bernoulli-form refuse config");
  sk.begin_set_step();
  std::vector<std::uint64_t> stale;
  for (const auto& [id, q] : sk.list().entries())
    if (contains(s, id)) stale.push_back(id);
  for (std::uint64_t id : stale) sk.remove_entry(id);

  std::uint64_t card = cardinality(s);
  if (mode == GeoMode::DebugScan) {
    // Jumping by a scanned geometric is one Bernoulli draw per candidate
    // index: failures skip, the success visits.  This is what makes a
    // one-element set consume draws exactly like the element-stream step.
    for (std::uint64_t idx = 1; idx <= card; ++idx)
      if (sk.rng().bernoulli(sk.cutoff())) visit_element(sk, s, idx);
  } else {
    std::uint64_t c = 0;
    for (;;) {
      std::uint64_t jump = sample_geometric(sk.rng(), sk.cutoff(), mode);
      if (jump > card - c) break;
      c += jump;
      visit_element(sk, s, c);
    }
  }
  sk.end_set_step();
}

RunOutput run_set_stream(const SetStreamConfig& cfg,
                         std::span<const DelphicSet> sets,
                         std::uint64_t n_cap, std::uint64_t m_cap) {
  SketchConfig sc = SketchConfig::for_variant(Variant::Cvm2Refuse, cfg.bucket_limit);
  Sketch sk(sc, cfg.seed);
  if (cfg.trace) sk.enable_trace();
  for (const DelphicSet& s : sets) {
    validate_set(s);
    process_set(sk, s, cfg.geo);
  }
  RunOutput out;
  out.report = sk.estimate(n_cap, m_cap);
  out.transcript = sk.transcript();
  return out;
}

}  // namespace cutoff
