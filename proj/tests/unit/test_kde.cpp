#include <doctest.h>

#include <cmath>
#include <sstream>

#include "liftcurve/error.hpp"
#include "liftcurve/kde.hpp"
#include "test_support.hpp"

using namespace liftcurve;

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kK1 = 0.24197072451914335;  // standard normal pdf at 1

double naive_density(const std::vector<double>& pts, double h, double x) {
  double s = 0.0;
  for (double p : pts) {
    const double u = (p - x) / h;
    s += std::exp(-0.5 * u * u);
  }
  return s * kInvSqrt2Pi / (static_cast<double>(pts.size()) * h);
}

}  // namespace

TEST_CASE("kde: Scott bandwidth") {
  CHECK(scott_bandwidth(100000, 1.0, BandwidthMode::PaperLiteral) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(scott_bandwidth(100000, 15.0, BandwidthMode::StdScaled) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(scott_bandwidth(32, 1.0, BandwidthMode::PaperLiteral) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(scott_bandwidth(1, 1.0, BandwidthMode::StdScaled), InsufficientDataError);
  CHECK_THROWS_AS(scott_bandwidth(10, 0.0, BandwidthMode::StdScaled), DegenerateError);
  const std::vector<double> xs = {1, 2, 3, 4};
  CHECK(sample_std(xs) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("kde: closed-form examples") {
  const std::vector<double> one = {0.0};
  CHECK(KdeModel(one, 1.0).density(0.0) == doctest::Approx(kInvSqrt2Pi).epsilon(1e-15));
  const std::vector<double> two = {-1.0, 1.0};
  const KdeModel m(two, 1.0);
  CHECK(std::abs(m.density(0.0) - kK1) < 1e-12);
  for (double x : {0.3, 1.7, 4.0}) CHECK(m.density(x) == m.density(-x));
  const auto self = m.density_batch(two);
  CHECK(self[0] == self[1]);
}

TEST_CASE("kde: density integrates to one") {
  const auto xs = testsupport::bimodal_bodyweights(5000, 5);
  for (auto mode : {BandwidthMode::StdScaled, BandwidthMode::PaperLiteral}) {
    KdeOptions o;
    o.mode = mode;
    const auto m = KdeModel::fit(xs, o);
    const double h = m.bandwidth();
    const double lo = *std::min_element(xs.begin(), xs.end()) - 8 * h;
    const double hi = *std::max_element(xs.begin(), xs.end()) + 8 * h;
    const auto grid = linear_grid(lo, hi, h / 10);
    const auto g = m.density_batch(grid);
    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) integral += 0.5 * (g[i] + g[i - 1]) * (grid[i] - grid[i - 1]);
    CHECK(std::abs(integral - 1.0) < 1e-3);
  }
}

TEST_CASE("kde: batch equals naive loop") {
  testsupport::Draws d(17);
  std::vector<double> pts(1000);
  for (auto& p : pts) p = d.normal(85, 18);
  const KdeModel m(pts, 3.0);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = d.uniform(20, 200);
  const auto batch = m.density_batch(xs);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ref = naive_density(pts, 3.0, xs[i]);
    worst = std::max(worst, std::abs(batch[i] - ref) / ref);
    CHECK(batch[i] == m.density(xs[i]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("kde: strictly positive far from the data") {
  const std::vector<double> pts = {80.0, 81.0};
  const KdeModel m(pts, 0.1);
  CHECK(m.density(0.0) > 0.0);
  CHECK(m.density(1e4) > 0.0);
  CHECK(std::isfinite(std::log(m.density(-1e6))));
  CHECK_THROWS_AS(m.density(NAN), DomainError);
}

TEST_CASE("kde: translation equivariance and duplicates") {
  const std::vector<double> a = {60, 61.5, 61.5, 70, 90};
  std::vector<double> b = a;
  for (auto& x : b) x += 25.0;
  const KdeModel ma(a, 2.0), mb(b, 2.0);
  for (double x : {50.0, 61.5, 75.0, 100.0}) {
    CHECK(ma.density(x) == doctest::Approx(mb.density(x + 25.0)).epsilon(1e-12));
  }
  CHECK(ma.size() == 5);
  CHECK(ma.support().size() == 4);
  CHECK(ma.multiplicity()[1] == 2.0);
}

TEST_CASE("kde: subsampling is seeded") {
  const auto xs = testsupport::bimodal_bodyweights(3000, 9);
  KdeOptions o;
  o.max_points = 1000;
  o.subsample_seed = 4;
  const auto m1 = KdeModel::fit(xs, o);
  const auto m2 = KdeModel::fit(xs, o);
  CHECK(m1.size() == 1000);
  CHECK(m1.density(80.0) == m2.density(80.0));
  o.subsample_seed = 5;
  CHECK(KdeModel::fit(xs, o).density(80.0) != m1.density(80.0));
}

TEST_CASE("kde: grid and csv export") {
  const auto grid = linear_grid(0.0, 1.0, 0.25);
  REQUIRE(grid.size() == 5);
  CHECK(grid.back() == 1.0);
  const std::vector<double> one = {0.0};
  std::ostringstream out;
  write_density_csv(out, KdeModel(one, 1.0), grid);
  CHECK(out.str().rfind("x_kg,density\n", 0) == 0);
}
