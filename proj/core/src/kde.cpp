#include "liftcurve/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "liftcurve/csv.hpp"
#include "liftcurve/error.hpp"
#include "liftcurve/random.hpp"

namespace liftcurve {

double scott_bandwidth(std::size_t n, double sample_std, BandwidthMode mode) {
  if (n < 2) throw InsufficientDataError("Scott's rule needs at least 2 points");
  const double factor = std::pow(static_cast<double>(n), -0.2);
  if (mode == BandwidthMode::PaperLiteral) return factor;
  if (!(sample_std > 0.0) || !std::isfinite(sample_std)) {
    throw DegenerateError("Scott's rule needs a positive sample standard deviation");
  }
  return sample_std * factor;
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientDataError("standard deviation needs at least 2 points");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

KdeModel KdeModel::fit(std::span<const double> points, const KdeOptions& options) {
  std::vector<double> used(points.begin(), points.end());
  if (used.size() > options.max_points && options.max_points >= 2) {
    // Partial Fisher-Yates: the first max_points slots are a uniform sample.
    const CounterStream stream(options.subsample_seed);
    for (std::size_t i = 0; i < options.max_points; ++i) {
      const std::size_t j = i + stream.below(used.size() - i, i, 0);
      std::swap(used[i], used[j]);
    }
    used.resize(options.max_points);
  }
  const double h = options.bandwidth_kg
                       ? *options.bandwidth_kg
                       : scott_bandwidth(used.size(), used.size() >= 2 ? sample_std(used) : 0.0,
                                         options.mode);
  return KdeModel(used, h, options.mode);
}

KdeModel::KdeModel(std::span<const double> points, double bandwidth_kg, BandwidthMode mode)
    : bandwidth_(bandwidth_kg), mode_(mode) {
  if (points.empty()) throw InsufficientDataError("KDE needs at least one point");
  if (!(bandwidth_kg > 0.0) || !std::isfinite(bandwidth_kg)) {
    throw DomainError("KDE bandwidth must be positive and finite");
  }
  build(points);
}

void KdeModel::build(std::span<const double> points) {
  std::vector<double> sorted(points.begin(), points.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw DomainError("KDE points must be finite");
  }
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    support_.push_back(sorted[i]);
    multiplicity_.push_back(static_cast<double>(j - i));
    i = j;
  }
  n_ = sorted.size();
  norm_ = 1.0 / (static_cast<double>(n_) * bandwidth_ * std::sqrt(2.0 * std::numbers::pi));
}

double KdeModel::density(double x) const {
  if (!std::isfinite(x)) throw DomainError("KDE evaluated at non-finite point");
  const double inv_h = 1.0 / bandwidth_;
  double sum = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const double u = (support_[i] - x) * inv_h;
    sum += multiplicity_[i] * std::exp(-0.5 * u * u);
  }
  if (sum > 0.0) return sum * norm_;

  // Every kernel underflowed: far from all points. Recover in log space so
  // the result stays positive.
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const double u = (support_[i] - x) * inv_h;
    max_log = std::max(max_log, std::log(multiplicity_[i]) - 0.5 * u * u);
  }
  double scaled = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const double u = (support_[i] - x) * inv_h;
    scaled += std::exp(std::log(multiplicity_[i]) - 0.5 * u * u - max_log);
  }
  const double value = std::exp(max_log + std::log(scaled) + std::log(norm_));
  return std::max(value, std::numeric_limits<double>::denorm_min());
}

std::vector<double> KdeModel::density_batch(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (xs.size() + kChunk - 1) / kChunk;
  const std::size_t workers =
      std::min<std::size_t>(chunks, std::max(1u, std::thread::hardware_concurrency()));

  auto run = [&](std::size_t worker) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      const std::size_t end = std::min(xs.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) out[i] = density(xs[i]);
    }
  };
  if (workers <= 1) {
    if (chunks > 0) run(0);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  return out;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw DomainError("grid needs finite lo <= hi and a positive step");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

void write_density_csv(std::ostream& out, const KdeModel& model, std::span<const double> grid) {
  const auto values = model.density_batch(grid);
  out << "x_kg,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << csv::format_fixed(grid[i], 4) << ',' << csv::format_shortest(values[i]) << '\n';
  }
}

}  // namespace liftcurve
