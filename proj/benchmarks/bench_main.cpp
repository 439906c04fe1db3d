// Microbenchmarks for the hot paths: per-element sketch updates, score
// sampling, set-stream updates, and the exact binomial tail summation.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cutoff/delphic.hpp"
#include "cutoff/harness.hpp"
#include "cutoff/sizing.hpp"
#include "cutoff/sketch.hpp"

namespace {

using namespace cutoff;

std::vector<std::uint64_t> bench_stream(std::uint64_t f0, std::uint64_t m) {
  Rng gen(42);
  return generate_stream(StreamSpec::zipf(f0, 1.0, m), gen);
}

void BM_SketchStep(benchmark::State& state, Variant v) {
  auto stream = bench_stream(4000, 20000);
  auto cfg = SketchConfig::for_variant(v, 256);
  for (auto _ : state) {
    Sketch sk(cfg, 7);
    for (auto a : stream) {
      if (sk.status() != Status::Running) break;
      sk.process(a);
    }
    benchmark::DoNotOptimize(sk.cutoff());
  }
  state.SetItemsProcessed(state.iterations() * stream.size());
}

void BM_SampleScore(benchmark::State& state, ScoreDistribution dist) {
  Rng rng(5);
  double acc = 0.0;
  for (auto _ : state) acc += sample_score(dist, rng);
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}

void BM_SetStream(benchmark::State& state, GeoMode mode) {
  std::vector<DelphicSet> sets;
  for (std::uint64_t i = 0; i < 99; ++i)
    sets.push_back(RangeSet{100 * i + 1, 100 * i + 200});
  SetStreamConfig cfg;
  cfg.bucket_limit = 205;
  cfg.geo = mode;
  for (auto _ : state) {
    cfg.seed += 1;
    auto out = run_set_stream(cfg, sets, 10000, sets.size());
    benchmark::DoNotOptimize(out.report.estimate);
  }
  state.SetItemsProcessed(state.iterations() * sets.size());
}

void BM_BinomialTail(benchmark::State& state) {
  auto n = std::uint64_t(state.range(0));
  for (auto _ : state) {
    auto t = binomial_tail_upper(n, 0.1, 0.5);
    benchmark::DoNotOptimize(t.exact);
  }
}

BENCHMARK_CAPTURE(BM_SketchStep, dond, Variant::DonD);
BENCHMARK_CAPTURE(BM_SketchStep, dond_prime, Variant::DonDPrime);
BENCHMARK_CAPTURE(BM_SketchStep, cvm2, Variant::Cvm2);
BENCHMARK_CAPTURE(BM_SketchStep, cvm2_refuse, Variant::Cvm2Refuse);
BENCHMARK_CAPTURE(BM_SampleScore, continuous_uniform,
                  ScoreDistribution::continuous_uniform());
BENCHMARK_CAPTURE(BM_SampleScore, discrete_uniform,
                  ScoreDistribution::discrete_uniform(std::uint64_t(1) << 24));
BENCHMARK_CAPTURE(BM_SampleScore, geo_like_finite,
                  ScoreDistribution::geo_like_finite(24));
BENCHMARK_CAPTURE(BM_SampleScore, geo_like_infinite,
                  ScoreDistribution::geo_like_infinite());
BENCHMARK_CAPTURE(BM_SetStream, debug_scan, GeoMode::DebugScan);
BENCHMARK_CAPTURE(BM_SetStream, fast_inversion, GeoMode::FastInversion);
BENCHMARK(BM_BinomialTail)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
