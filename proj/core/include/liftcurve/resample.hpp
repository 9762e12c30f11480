#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liftcurve/ingest.hpp"
#include "liftcurve/kde.hpp"

namespace liftcurve {

inline constexpr std::size_t kDefaultResampleSize = 100000;
inline constexpr double kDefaultWeightFloor = 1e-8;

struct ResamplePlan {
  std::size_t k = kDefaultResampleSize;
  std::uint64_t seed = 0;
  // Std of the Gaussian bodyweight jitter in kg. Unset means "use the KDE
  // bandwidth" in inverse_density_resample; the low-level resample() treats
  // unset as no jitter.
  std::optional<double> jitter_std_kg;
  // Density floor in 1/kg; caps the weight of isolated outliers.
  double weight_floor = kDefaultWeightFloor;

  void validate() const;
};

// w_i = 1 / max(g(x_i), floor), with g the KDE evaluated at each bodyweight.
std::vector<double> compute_weights(std::span<const LifterEntry> entries, const KdeModel& kde,
                                    double floor = kDefaultWeightFloor);

// k draws with replacement, entry i chosen with probability w_i / sum_j w_j,
// by inversion of the cumulative weights. With jitter, each drawn bodyweight
// gets independent N(0, jitter^2) noise, redrawn while the result is <= 0.
// Totals are left untouched. Draw j depends only on (seed, j), so the output
// is a pure function of the arguments.
std::vector<LifterEntry> resample(std::span<const LifterEntry> entries, std::span<const double> weights,
                                  const ResamplePlan& plan);

struct ResampleOutcome {
  std::vector<LifterEntry> entries;
  std::vector<double> weights;
  double bandwidth_kg = 0.0;
  double jitter_std_kg = 0.0;
};

// Fits the KDE on the entries' bodyweights, computes weights and resamples.
ResampleOutcome inverse_density_resample(std::span<const LifterEntry> entries, const ResamplePlan& plan,
                                         const KdeOptions& kde_options = {});

// Sidecar describing how a resampled dataset was produced.
std::string resample_sidecar_json(const ResamplePlan& plan, const ResampleOutcome& outcome,
                                  std::size_t source_rows, BandwidthMode mode);

}  // namespace liftcurve
