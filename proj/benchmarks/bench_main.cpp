#include <benchmark/benchmark.h>

#include "dgw/limit_theory.hpp"
#include "dgw/pgf.hpp"
#include "dgw/simulator.hpp"
#include "dgw/theta_family.hpp"

namespace {

const dgw::DefectivePGF kFig({0, 0, 0.7, 0.2});
const dgw::DefectivePGF kEven({0.25, 0, 0.25});

void BM_SeriesCompose(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto f = kEven.as_series(n);
  for (auto _ : state) benchmark::DoNotOptimize(dgw::series_compose(f, f));
}
BENCHMARK(BM_SeriesCompose)->Arg(64)->Arg(256)->Arg(1024);

void BM_IterateSeries(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dgw::iterate_series(kEven, 25, 64));
}
BENCHMARK(BM_IterateSeries);

void BM_HFunction(benchmark::State& state) {
  for (auto _ : state) {
    const dgw::HFunction H(kEven);
    benchmark::DoNotOptimize(H(0.5));
  }
}
BENCHMARK(BM_HFunction);

void BM_RFunction(benchmark::State& state) {
  for (auto _ : state) {
    const dgw::RFunction R(kFig);
    benchmark::DoNotOptimize(R(1.0));
  }
}
BENCHMARK(BM_RFunction);

void BM_LimitQj(benchmark::State& state) {
  const auto p = dgw::extinction_prob(kEven);
  for (auto _ : state) benchmark::DoNotOptimize(dgw::limit_distribution_qj(kEven, p, 64));
}
BENCHMARK(BM_LimitQj);

void BM_ThetaIterate(benchmark::State& state) {
  const auto law = dgw::ThetaLaw::positive_log_gap(0.5, 0.0, 0.25, -30.0);
  double s = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dgw::theta_iterate(law, 40, s));
    s = s > 0.9 ? 0.0 : s + 0.01;
  }
}
BENCHMARK(BM_ThetaIterate);

void BM_Simulate(benchmark::State& state) {
  dgw::SimulationOptions opts;
  opts.sampler = static_cast<dgw::Sampler>(state.range(0));
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(dgw::simulate_paths(kFig, 7, 10000, 1, opts));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Simulate)
    ->Arg(static_cast<int>(dgw::Sampler::DIRECT))
    ->Arg(static_cast<int>(dgw::Sampler::CONTROLLED))
    ->Arg(static_cast<int>(dgw::Sampler::CONDITIONED));

}  // namespace
BENCHMARK_MAIN();
