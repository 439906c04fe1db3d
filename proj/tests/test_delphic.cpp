#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "cutoff/delphic.hpp"
#include "cutoff/sketch.hpp"

using namespace cutoff;

TEST_CASE("range sets: cardinality, membership, picking") {
  DelphicSet s = RangeSet{5, 9};
  CHECK_NOTHROW(validate_set(s));
  CHECK(cardinality(s) == 5);
  for (std::uint64_t v = 5; v <= 9; ++v) CHECK(contains(s, v));
  CHECK_FALSE(contains(s, 4));
  CHECK_FALSE(contains(s, 10));
  CHECK(pick(s, 1) == 5);
  CHECK(pick(s, 3) == 7);
  CHECK(pick(s, 5) == 9);
  CHECK_THROWS_AS(pick(s, 0), std::out_of_range);
  CHECK_THROWS_AS(pick(s, 6), std::out_of_range);
}

TEST_CASE("set validation rejects malformed shapes") {
  CHECK_THROWS_AS(validate_set(RangeSet{0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(validate_set(RangeSet{5, 3}), std::invalid_argument);
  CHECK_THROWS_AS(validate_set(CuboidSet{{}, 10}), std::invalid_argument);
  CHECK_THROWS_AS(validate_set(CuboidSet{{{1, 2}}, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate_set(CuboidSet{{{3, 2}}, 10}), std::invalid_argument);
  CHECK_THROWS_AS(validate_set(CuboidSet{{{1, 11}}, 10}), std::invalid_argument);
  // Token space must fit 64 bits: (2^32)^2 and (2^16)^4 both overflow.
  CHECK_THROWS_AS(validate_set(CuboidSet{{{1, 2}, {1, 2}}, 1ull << 32}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      validate_set(CuboidSet{{{1, 2}, {1, 2}, {1, 2}, {1, 2}}, 1ull << 16}),
      std::invalid_argument);
  CHECK_NOTHROW(
      validate_set(CuboidSet{{{1, 2}, {1, 2}, {1, 2}, {1, 2}}, 65535}));
}

TEST_CASE("cuboid picking walks the last dimension fastest") {
  CuboidSet c{{{1, 2}, {1, 3}}, 4};
  DelphicSet s = c;
  CHECK(cardinality(s) == 6);
  std::vector<std::vector<std::uint64_t>> want = {
      {1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}};
  for (std::uint64_t i = 1; i <= 6; ++i) {
    CHECK(pick_coords(c, i) == want[i - 1]);
    // Token encoding is 1 + mixed-radix over the full universe.
    auto& w = want[i - 1];
    CHECK(pick(s, i) == 1 + (w[0] - 1) * 4 + (w[1] - 1));
  }
  CHECK(pick_coords(c, 4) == std::vector<std::uint64_t>{2, 1});
  CHECK_THROWS_AS(pick(s, 7), std::out_of_range);
  CHECK_THROWS_AS(pick(s, 0), std::out_of_range);
}

TEST_CASE("cuboid tokens are distinct, ascending, and members") {
  CuboidSet c{{{2, 4}, {1, 2}, {3, 5}}, 7};
  DelphicSet s = c;
  std::uint64_t card = cardinality(s);
  CHECK(card == 3 * 2 * 3);
  std::set<std::uint64_t> seen;
  std::uint64_t prev = 0;
  for (std::uint64_t i = 1; i <= card; ++i) {
    std::uint64_t tok = pick(s, i);
    CHECK(tok > prev);
    prev = tok;
    CHECK(contains(s, tok));
    seen.insert(tok);
  }
  CHECK(seen.size() == card);
  // Everything else in the universe is outside.
  std::uint64_t space = 7 * 7 * 7;
  std::uint64_t inside = 0;
  for (std::uint64_t tok = 1; tok <= space; ++tok) inside += contains(s, tok);
  CHECK(inside == card);
  CHECK_FALSE(contains(s, 0));
  CHECK_FALSE(contains(s, space + 1));
}

TEST_CASE("one-dimensional cuboids and ranges agree token for token") {
  DelphicSet range = RangeSet{3, 7};
  DelphicSet cub = CuboidSet{{{3, 7}}, 100};
  REQUIRE(cardinality(range) == cardinality(cub));
  for (std::uint64_t i = 1; i <= 5; ++i) CHECK(pick(range, i) == pick(cub, i));
  for (std::uint64_t v = 1; v <= 10; ++v)
    CHECK(contains(range, v) == contains(cub, v));
}

TEST_CASE("geometric sampling: p = 1 always jumps by one") {
  Rng r(3);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_geometric(r, 1.0, GeoMode::DebugScan) == 1);
    CHECK(sample_geometric(r, 1.0, GeoMode::FastInversion) == 1);
  }
  CHECK_THROWS_AS(sample_geometric(r, 0.0, GeoMode::DebugScan),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_geometric(r, 1.5, GeoMode::FastInversion),
                  std::invalid_argument);
}

TEST_CASE("scanned geometric equals a manual coin count") {
  Rng a(17), b(17);
  for (int i = 0; i < 5000; ++i) {
    std::uint64_t got = sample_geometric(a, 0.3, GeoMode::DebugScan);
    std::uint64_t want = 1;
    while (!b.bernoulli(0.3)) ++want;
    CHECK(got == want);
  }
  CHECK(a.draws_consumed() == b.draws_consumed());
}

TEST_CASE("both geometric modes have the right mean and mass at one") {
  for (GeoMode mode : {GeoMode::DebugScan, GeoMode::FastInversion}) {
    Rng r(29);
    const int n = 1000000;
    double sum = 0;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      std::uint64_t k = sample_geometric(r, 0.5, mode);
      sum += double(k);
      ones += k == 1;
    }
    CHECK(std::abs(sum / n - 2.0) <= 0.01);
    CHECK(std::abs(double(ones) / n - 0.5) <= 3.5 * std::sqrt(0.25 / n));
  }
}

TEST_CASE("small unions are collected exactly while the cutoff is one") {
  std::vector<DelphicSet> sets = {RangeSet{1, 5}, RangeSet{3, 8}};
  for (GeoMode mode : {GeoMode::DebugScan, GeoMode::FastInversion}) {
    SetStreamConfig cfg;
    cfg.bucket_limit = 100;
    cfg.seed = 11;
    cfg.geo = mode;
    cfg.trace = true;
    auto out = run_set_stream(cfg, sets, 1u << 20, sets.size());
    CHECK(out.report.estimate == 8.0);
    CHECK(out.report.final_cutoff == 1.0);
    CHECK(out.report.steps_processed == 2);
    REQUIRE(out.transcript.steps.size() == 2);
    CHECK(out.transcript.steps[0].members ==
          std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(out.transcript.steps[1].members ==
          std::vector<std::uint64_t>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK_FALSE(out.transcript.steps[1].score.has_value());
  }

  std::vector<DelphicSet> cub = {CuboidSet{{{1, 2}, {1, 3}}, 4}};
  SetStreamConfig cfg;
  cfg.bucket_limit = 100;
  auto out = run_set_stream(cfg, cub, 1u << 20, 1);
  CHECK(out.report.estimate == 6.0);

  std::vector<DelphicSet> none;
  CHECK(run_set_stream(cfg, none, 10, 0).report.estimate == 0.0);
}

TEST_CASE("reprocessing a set first drops its stale members") {
  // Same set twice at cutoff 1: the walk re-visits everything, so the list
  // is unchanged and no duplicate insert fires.
  std::vector<DelphicSet> sets = {RangeSet{1, 5}, RangeSet{1, 5}};
  SetStreamConfig cfg;
  cfg.bucket_limit = 50;
  cfg.trace = true;
  auto out = run_set_stream(cfg, sets, 100, 2);
  CHECK(out.report.estimate == 5.0);
  CHECK(out.transcript.steps[0].members == out.transcript.steps[1].members);
}

TEST_CASE("set processing requires the Bernoulli-form refuse sketch") {
  auto cfg = SketchConfig::for_variant(Variant::Cvm2, 8);
  Sketch sk(cfg, 0);
  DelphicSet s = RangeSet{1, 4};
  CHECK_THROWS_AS(process_set(sk, s, GeoMode::FastInversion), std::logic_error);
}

TEST_CASE("singleton sets replay the element-stream coin step, draw for draw") {
  auto cfg = SketchConfig::for_variant(Variant::Cvm2Refuse, 4);
  Sketch sets_sk(cfg, 9), elem_sk(cfg, 9);
  for (int t = 0; t < 300; ++t) {
    std::uint64_t a = (t * 17) % 61 + 1;
    DelphicSet s = RangeSet{a, a};
    process_set(sets_sk, s, GeoMode::DebugScan);
    elem_sk.cvm2_refuse_step(a);
    REQUIRE(sets_sk.cutoff() == elem_sk.cutoff());
    REQUIRE(sets_sk.list().members() == elem_sk.list().members());
    REQUIRE(sets_sk.draws_consumed() == elem_sk.draws_consumed());
    REQUIRE(sets_sk.steps() == elem_sk.steps());
  }
}

TEST_CASE("capacity invariant holds across a long set stream") {
  std::vector<DelphicSet> sets;
  for (std::uint64_t i = 0; i < 120; ++i)
    sets.push_back(RangeSet{1 + 7 * i, 7 * i + 25});
  SetStreamConfig cfg;
  cfg.bucket_limit = 12;
  cfg.seed = 5;
  cfg.trace = true;
  auto out = run_set_stream(cfg, sets, 1u << 30, sets.size());
  double prev = 1.0;
  for (const auto& st : out.transcript.steps) {
    CHECK(st.members.size() <= 12);
    CHECK(st.cutoff <= prev);
    prev = st.cutoff;
  }
  CHECK(out.report.estimate ==
        double(out.report.final_list_size) / out.report.final_cutoff);
}

TEST_CASE("a trillion-token cuboid is estimated without scanning it") {
  std::vector<DelphicSet> sets = {
      CuboidSet{{{1, 1000000}, {1, 1000000}}, 1000000}};
  SetStreamConfig cfg;
  cfg.bucket_limit = 256;
  cfg.seed = 1;
  auto out = run_set_stream(cfg, sets, UINT64_MAX, 1);
  double truth = 1e12;
  CHECK(out.report.estimate >= 0.5 * truth);
  CHECK(out.report.estimate <= 1.5 * truth);
}

TEST_CASE("estimates from unions of overlapping ranges are well calibrated") {
  // Union of [1+50i .. 100+50i] for i = 0..9 is exactly [1..550].
  std::vector<DelphicSet> sets;
  for (std::uint64_t i = 0; i < 10; ++i)
    sets.push_back(RangeSet{1 + 50 * i, 100 + 50 * i});
  const double truth = 550.0;
  for (GeoMode mode : {GeoMode::DebugScan, GeoMode::FastInversion}) {
    int failures = 0;
    const int runs = 60;
    for (int seed = 0; seed < runs; ++seed) {
      SetStreamConfig cfg;
      cfg.bucket_limit = 205;  // sized for eps 1/2, delta 1/10 at n' = 10
      cfg.seed = 1000 + seed;
      cfg.geo = mode;
      auto out = run_set_stream(cfg, sets, 1u << 20, sets.size());
      double est = out.report.estimate;
      failures += est < 0.5 * truth || est > 1.5 * truth;
    }
    // Failure probability is at most 1/10; 60 trials stay below 14
    // failures except with probability under 1e-4.
    CHECK(failures <= 14);
  }
}
