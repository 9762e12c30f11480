#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace liftcurve {

enum class BandwidthMode {
  // h = n^(-1/5), used directly as kilograms.
  PaperLiteral,
  // h = sample_std * n^(-1/5) (Scott's factor applied to the data's spread).
  StdScaled,
};

// Scott's rule bandwidth. Throws InsufficientDataError for n < 2 and
// DegenerateError for a non-positive spread in StdScaled mode.
double scott_bandwidth(std::size_t n, double sample_std, BandwidthMode mode);

// Sample standard deviation with n - 1 in the denominator.
double sample_std(std::span<const double> xs);

struct KdeOptions {
  BandwidthMode mode = BandwidthMode::StdScaled;
  // Overrides the rule-of-thumb bandwidth when set.
  std::optional<double> bandwidth_kg;
  // Larger inputs are replaced by a seeded uniform subsample of this size.
  std::size_t max_points = 500000;
  std::uint64_t subsample_seed = 0;
};

// One-dimensional Gaussian kernel density estimate
//
//   g(x) = 1/(n h) * sum_i K((x_i - x) / h),   K(u) = exp(-u^2 / 2) / sqrt(2 pi).
//
// Coincident points are stored once with a multiplicity, which leaves the
// sum unchanged and makes repeated bodyweights cheap.
class KdeModel {
 public:
  // Bandwidth from Scott's rule (or options.bandwidth_kg).
  static KdeModel fit(std::span<const double> points, const KdeOptions& options = {});

  // Explicit bandwidth; `mode` is recorded for reporting only.
  KdeModel(std::span<const double> points, double bandwidth_kg,
           BandwidthMode mode = BandwidthMode::StdScaled);

  // Density at x (1/kg). Strictly positive for finite x.
  double density(double x) const;

  // Elementwise density(x), evaluated in parallel chunks; output order
  // matches input order and values are identical to density().
  std::vector<double> density_batch(std::span<const double> xs) const;

  double bandwidth() const { return bandwidth_; }
  BandwidthMode mode() const { return mode_; }
  // Number of points the estimate is built on (after subsampling).
  std::size_t size() const { return n_; }
  // Distinct support points, ascending, with their multiplicities.
  std::span<const double> support() const { return support_; }
  std::span<const double> multiplicity() const { return multiplicity_; }

 private:
  KdeModel() = default;
  void build(std::span<const double> points);

  std::vector<double> support_;
  std::vector<double> multiplicity_;
  std::size_t n_ = 0;
  double bandwidth_ = 0.0;
  BandwidthMode mode_ = BandwidthMode::StdScaled;
  double norm_ = 0.0;
};

// Grid lo, lo + step, ... up to and including hi (within step/2).
std::vector<double> linear_grid(double lo, double hi, double step);

// Two-column CSV "x_kg,density" over the grid.
void write_density_csv(std::ostream& out, const KdeModel& model, std::span<const double> grid);

}  // namespace liftcurve
