#pragma once

#include <span>

namespace liftcurve {

// Empirical quantile of an ascending sample, linear interpolation between
// order statistics (position level * (n - 1)).
double quantile_sorted(std::span<const double> sorted, double level);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace liftcurve
