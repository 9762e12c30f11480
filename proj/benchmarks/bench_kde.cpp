#include <benchmark/benchmark.h>

#include <cmath>

#include "liftcurve/kde.hpp"
#include "liftcurve/random.hpp"

namespace {

std::vector<double> bodyweights(std::size_t n, std::uint64_t seed) {
  const liftcurve::CounterStream s(seed);
  std::vector<double> xs(n);
  // rounded to 0.1 kg like real entries, so the support dedupes
  for (std::size_t i = 0; i < n; ++i) xs[i] = std::round((85.0 + 17.0 * s.normal(i, 0)) * 10) / 10;
  return xs;
}

void BM_KdeDensityBatch(benchmark::State& state) {
  const auto pts = bodyweights(static_cast<std::size_t>(state.range(0)), 1);
  const auto model = liftcurve::KdeModel::fit(pts);
  const auto grid = liftcurve::linear_grid(30, 230, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(model.density_batch(grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_KdeDensityBatch)->Arg(1000)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_KdeFit(benchmark::State& state) {
  const auto pts = bodyweights(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(liftcurve::KdeModel::fit(pts));
}
BENCHMARK(BM_KdeFit)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
