#include <benchmark/benchmark.h>

#include <cmath>

#include "liftcurve/random.hpp"
#include "liftcurve/resample.hpp"

namespace {

std::vector<liftcurve::LifterEntry> entries(std::size_t n) {
  const liftcurve::CounterStream s(4);
  std::vector<liftcurve::LifterEntry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].bodyweight_kg = std::round((85.0 + 17.0 * s.normal(i, 0)) * 10) / 10;
    out[i].total_kg = 600.0;
  }
  return out;
}

void BM_InverseDensityResample(benchmark::State& state) {
  const auto rows = entries(static_cast<std::size_t>(state.range(0)));
  liftcurve::ResamplePlan plan;
  plan.k = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(liftcurve::inverse_density_resample(rows, plan));
}
BENCHMARK(BM_InverseDensityResample)->Arg(50000)->Arg(500000)->Unit(benchmark::kMillisecond);

void BM_ResampleDraws(benchmark::State& state) {
  const auto rows = entries(100000);
  const std::vector<double> w(rows.size(), 1.0);
  liftcurve::ResamplePlan plan;
  plan.k = static_cast<std::size_t>(state.range(0));
  plan.jitter_std_kg = 1.5;
  for (auto _ : state) benchmark::DoNotOptimize(liftcurve::resample(rows, w, plan));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ResampleDraws)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
