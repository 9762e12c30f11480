#include "liftcurve/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "liftcurve/error.hpp"

namespace liftcurve {

double quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace liftcurve
