#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "liftcurve/ingest.hpp"
#include "liftcurve/scoring.hpp"

namespace liftcurve {

inline constexpr std::size_t kDefaultMyriadSize = 10000;
inline constexpr std::size_t kDefaultQuantileWindow = 100;

struct MyriadBin {
  double mean_bodyweight_kg = 0.0;
  double mean_total_kg = 0.0;
  std::size_t count = 0;
};

struct MyriadBins {
  std::size_t group_size = kDefaultMyriadSize;
  std::vector<MyriadBin> bins;
};

// Sorts by bodyweight (ties: total, then input order), cuts consecutive
// groups of group_size and averages each. A trailing partial group is kept
// when it holds at least group_size / 10 results, otherwise merged into the
// previous group.
MyriadBins myriad_averages(std::span<const LifterEntry> entries, std::size_t group_size = kDefaultMyriadSize);

struct RollingQuantiles {
  struct Row {
    double center_bodyweight_kg = 0.0;
    std::vector<double> values;  // one per level
  };
  std::size_t window = kDefaultQuantileWindow;
  std::vector<double> levels;
  std::vector<Row> rows;
};

std::vector<double> default_quantile_levels();

// Slides a window of `window` bodyweight-sorted results (stride 1, ties in
// input order) and reports empirical score quantiles with linear
// interpolation between order statistics. The center is the window's median
// bodyweight. Throws InsufficientDataError when n < window.
RollingQuantiles rolling_quantiles(std::span<const ScoredEntry> scored, std::size_t window = kDefaultQuantileWindow,
                                   std::vector<double> levels = default_quantile_levels());

struct Histogram {
  std::vector<double> edges;         // bins + 1 ascending edges
  std::vector<std::size_t> counts;   // last bin closed on the right
};

struct GaussianFit {
  double mean = 0.0;
  double std = 0.0;
};

// Moments use the population convention (divide by n). The Gaussian fit
// matches the first two moments.
struct ScoreDistribution {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  Histogram histogram;
  GaussianFit gaussian_fit;
};

// Freedman-Diaconis histogram (Sturges when the IQR is zero). Throws
// InsufficientDataError for n < 2, DegenerateError for zero variance.
ScoreDistribution score_distribution(std::span<const double> scores);

std::vector<double> scores_of(std::span<const ScoredEntry> scored);

// Fraction of entries with bodyweight strictly below the threshold.
double fraction_below(std::span<const LifterEntry> entries, double threshold_kg);

// Tidy CSV exports, one row per bin / window / histogram bin.
void write_myriad_csv(std::ostream& out, const MyriadBins& bins);
void write_quantiles_csv(std::ostream& out, const RollingQuantiles& quantiles);
void write_distribution_csv(std::ostream& out, const ScoreDistribution& dist);

}  // namespace liftcurve
