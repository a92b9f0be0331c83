#include "markerlab/gibbs.hpp"
#include "markerlab/markers.hpp"
#include "markerlab/measures.hpp"
#include "markerlab/robinson.hpp"
#include "markerlab/turing.hpp"

#include <benchmark/benchmark.h>

using namespace markerlab;

namespace {

const Tileset& robinson() {
  static const Tileset ts = build_tileset();
  return ts;
}

void BM_CountAdmissible_Parallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(count_admissible(robinson(), static_cast<int>(state.range(0)), 1u << 30));
}
void BM_CountAdmissible_Serial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::count_admissible(robinson(), static_cast<int>(state.range(0)), 1u << 30));
}
BENCHMARK(BM_CountAdmissible_Parallel)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountAdmissible_Serial)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Covering_Parallel(benchmark::State& state) {
  const auto q = macro_marker_set(robinson(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(search_covering_counterexample(robinson(), q, 200'000));
}
void BM_Covering_Serial(benchmark::State& state) {
  const auto q = macro_marker_set(robinson(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::search_covering_counterexample(robinson(), q, 200'000));
}
BENCHMARK(BM_Covering_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Covering_Serial)->Unit(benchmark::kMillisecond);

void BM_WordMeasure_Parallel(benchmark::State& state) {
  const auto m = corpus::parity();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(word_measure(m, k, b_read(k)));
}
void BM_WordMeasure_Serial(benchmark::State& state) {
  const auto m = corpus::parity();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(serial::word_measure(m, k, b_read(k)));
}
BENCHMARK(BM_WordMeasure_Parallel)->Arg(14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WordMeasure_Serial)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_Conditional_Incremental(benchmark::State& state) {
  MeasureFlow flow;
  flow.measure = [](int j) { return WordMeasure::bernoulli(2, Rational(1, (j % 3) + 2)); };
  for (auto _ : state) benchmark::DoNotOptimize(conditional_grid_measure(static_cast<int>(state.range(0)), 2, flow));
}
void BM_Conditional_Direct(benchmark::State& state) {
  MeasureFlow flow;
  flow.measure = [](int j) { return WordMeasure::bernoulli(2, Rational(1, (j % 3) + 2)); };
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::conditional_grid_measure(static_cast<int>(state.range(0)), 2, flow));
}
BENCHMARK(BM_Conditional_Incremental)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conditional_Direct)->Arg(128)->Unit(benchmark::kMillisecond);

Potential toy_potential() {
  return Potential({{{{0, 0, 0}, {1, 0, 1}}, Rational(1)}, {{{0, 0, 1}, {0, 1, 1}}, Rational(1, 2)}});
}

void BM_Boltzmann_Parallel(benchmark::State& state) {
  const auto p = toy_potential();
  for (auto _ : state) benchmark::DoNotOptimize(boltzmann_exact(3, p, 3, 1.0, 1u << 22));
}
void BM_Boltzmann_Serial(benchmark::State& state) {
  const auto p = toy_potential();
  for (auto _ : state) benchmark::DoNotOptimize(serial::boltzmann_exact(3, p, 3, 1.0, 1u << 22));
}
BENCHMARK(BM_Boltzmann_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Boltzmann_Serial)->Unit(benchmark::kMillisecond);

void BM_CoverageSweep_Parallel(benchmark::State& state) {
  const auto p = toy_potential();
  const MarkerSet q({Patch(1, 1, {}, 0)}, Rational(1));
  const std::vector<double> betas{0.0, 0.5, 1.0, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(coverage_sweep(2, p, q, 8, betas, 20'000, 4, 7));
}
void BM_CoverageSweep_Serial(benchmark::State& state) {
  const auto p = toy_potential();
  const MarkerSet q({Patch(1, 1, {}, 0)}, Rational(1));
  const std::vector<double> betas{0.0, 0.5, 1.0, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(serial::coverage_sweep(2, p, q, 8, betas, 20'000, 4, 7));
}
BENCHMARK(BM_CoverageSweep_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageSweep_Serial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
