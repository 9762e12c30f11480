#include <benchmark/benchmark.h>

#include "liftcurve/fit.hpp"
#include "liftcurve/random.hpp"

namespace {

std::vector<liftcurve::Observation> synthetic(std::size_t n) {
  const liftcurve::GrowthParams truth(liftcurve::ModelFamily::Logistic, 722.3, 0.05447, 53.4);
  const liftcurve::CounterStream s(3);
  std::vector<liftcurve::Observation> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 40.0 + 140.0 * s.uniform(i, 0);
    data[i] = {x, liftcurve::eval(truth, x) + 30.0 * s.normal(i, 1)};
  }
  return data;
}

void BM_FitLogistic(benchmark::State& state) {
  const auto data = synthetic(static_cast<std::size_t>(state.range(0)));
  liftcurve::FitConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(liftcurve::fit(data, cfg));
}
BENCHMARK(BM_FitLogistic)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_FitVonBertalanffy(benchmark::State& state) {
  const auto data = synthetic(static_cast<std::size_t>(state.range(0)));
  liftcurve::FitConfig cfg;
  cfg.family = liftcurve::ModelFamily::VonBertalanffy;
  for (auto _ : state) benchmark::DoNotOptimize(liftcurve::fit(data, cfg));
}
BENCHMARK(BM_FitVonBertalanffy)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
