#include <doctest.h>

#include <chrono>
#include <cmath>

#include "liftcurve/error.hpp"
#include "liftcurve/fit.hpp"
#include "test_support.hpp"

using namespace liftcurve;

namespace {

const GrowthParams kTruth(ModelFamily::Logistic, 722.3, 0.05447, 53.4);

std::vector<Observation> noisy_logistic(std::size_t n, double noise, std::uint64_t seed) {
  testsupport::Draws d(seed);
  std::vector<Observation> data;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d.uniform(40, 180);
    data.push_back({x, eval(kTruth, x) + d.normal(0, noise)});
  }
  return data;
}

}  // namespace

TEST_CASE("fit: recovers logistic parameters from noisy data") {
  const auto data = noisy_logistic(10000, 30.0, 1);
  FitConfig cfg;
  const auto r = fit(data, cfg);
  CHECK(r.converged);
  CHECK_FALSE(r.degenerate);
  CHECK(r.iterations <= 100);
  CHECK(std::abs(r.params.L() / 722.3 - 1) < 0.02);
  CHECK(std::abs(r.params.k() / 0.05447 - 1) < 0.02);
  CHECK(std::abs(r.params.x0() / 53.4 - 1) < 0.02);
  CHECK(r.rmse == doctest::Approx(std::sqrt(r.sse / 10000)).epsilon(1e-14));
  CHECK(r.rmse == doctest::Approx(30.0).epsilon(0.05));
}

TEST_CASE("fit: exact Von Bertalanffy samples") {
  const GrowthParams truth(ModelFamily::VonBertalanffy, 776.7, 0.02045, 22.33);
  std::vector<Observation> data;
  for (int i = 0; i < 100; ++i) {
    const double x = 40.0 + 1.4 * i;
    data.push_back({x, eval(truth, x)});
  }
  FitConfig cfg;
  cfg.family = ModelFamily::VonBertalanffy;
  const auto r = fit(data, cfg);
  CHECK(r.converged);
  CHECK(r.sse < 1e-12);
  CHECK(std::abs(r.params.L() / truth.L() - 1) < 1e-6);
  CHECK(std::abs(r.params.k() / truth.k() - 1) < 1e-6);
  CHECK(std::abs(r.params.x0() / truth.x0() - 1) < 1e-6);
}

TEST_CASE("fit: accepted steps never increase the SSE") {
  const auto data = noisy_logistic(2000, 30.0, 2);
  FitConfig cfg;
  const auto start = auto_init(data, ModelFamily::Logistic);
  const auto r = fit_from(data, start, FitBounds::defaults_for(data), cfg);
  REQUIRE(r.sse_trace.size() >= 2);
  for (std::size_t i = 1; i < r.sse_trace.size(); ++i) CHECK(r.sse_trace[i] <= r.sse_trace[i - 1]);
  CHECK(r.sse == r.sse_trace.back());
}

TEST_CASE("fit: constant totals are flagged, not diverged") {
  std::vector<Observation> data;
  for (int i = 0; i < 50; ++i) data.push_back({40.0 + 2.0 * i, 500.0});
  for (auto family : {ModelFamily::VonBertalanffy, ModelFamily::Logistic}) {
    FitConfig cfg;
    cfg.family = family;
    const auto r = fit(data, cfg);
    CHECK((r.degenerate || !r.converged));
    CHECK(std::isfinite(r.sse));
  }
}

TEST_CASE("fit: auto init") {
  std::vector<Observation> data;
  for (int i = 0; i < 20; ++i) data.push_back({40.0 + 140.0 * i / 19, 350.0 + 350.0 * i / 19});
  const auto vb = auto_init(data, ModelFamily::VonBertalanffy);
  CHECK(vb.L() == doctest::Approx(735.0));
  CHECK(vb.k() == doctest::Approx(2.0 / 140).epsilon(1e-12));
  const auto lg = auto_init(data, ModelFamily::Logistic);
  CHECK(lg.x0() == doctest::Approx(110.0 - 140.0).epsilon(1e-12));

  std::vector<Observation> flat(20, {80.0, 500.0});
  CHECK_THROWS_AS(auto_init(flat, ModelFamily::Logistic), DegenerateError);
}

TEST_CASE("fit: input validation") {
  std::vector<Observation> few(9, {80.0, 500.0});
  CHECK_THROWS_AS(fit(few, FitConfig{}), InsufficientDataError);
  auto data = noisy_logistic(20, 10.0, 3);
  data[4].y = -1.0;
  CHECK_THROWS_AS(fit(data, FitConfig{}), DomainError);
  FitConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(fit(noisy_logistic(20, 10.0, 3), bad), ConfigError);
}

TEST_CASE("fit: deterministic") {
  const auto data = noisy_logistic(3000, 30.0, 4);
  const auto a = fit(data, FitConfig{});
  const auto b = fit(data, FitConfig{});
  CHECK(a.params == b.params);
  CHECK(a.sse == b.sse);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("fit: bounds are respected") {
  const auto data = noisy_logistic(1000, 30.0, 5);
  FitConfig cfg;
  FitBounds b = FitBounds::defaults_for(data);
  b.L = {100.0, 600.0};
  cfg.bounds = b;
  const auto r = fit(data, cfg);
  CHECK(r.params.L() <= 600.0);
  CHECK(r.degenerate);
}

TEST_CASE("fit: covariance proxy is symmetric and positive on the diagonal") {
  const auto r = fit(noisy_logistic(2000, 30.0, 6), FitConfig{});
  for (int i = 0; i < 3; ++i) {
    CHECK(r.covariance_proxy[i][i] > 0.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(r.covariance_proxy[i][j] == doctest::Approx(r.covariance_proxy[j][i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("fit: results json") {
  std::vector<FittedRecord> recs = {{Sex::Male, DatasetVariant::Original, 10000, fit(noisy_logistic(500, 30.0, 7), FitConfig{})}};
  const auto j = fit_results_json(recs);
  for (const char* key : {"\"sse\"", "\"rmse\"", "\"iterations\"", "\"converged\"", "\"L_1e2kg\"", "\"x0\""}) {
    CHECK(j.find(key) != std::string::npos);
  }
}
