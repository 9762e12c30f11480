#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liftcurve/ingest.hpp"
#include "liftcurve/models.hpp"

namespace liftcurve {

// One (bodyweight, total) pair in kg.
struct Observation {
  double x = 0.0;
  double y = 0.0;
};

std::vector<Observation> observations(std::span<const LifterEntry> entries);

struct ParamBounds {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

struct FitBounds {
  ParamBounds L;
  ParamBounds k;
  ParamBounds x0;

  // L in (0, 3 max y], k in [1e-4, 1], x0 in [-100, min x + 100].
  static FitBounds defaults_for(std::span<const Observation> data);
  void validate() const;
};

inline constexpr std::size_t kMinFitObservations = 10;

struct FitConfig {
  ModelFamily family = ModelFamily::Logistic;
  // Starting point; auto_init() when unset.
  std::optional<GrowthParams> init;
  // FitBounds::defaults_for(data) when unset.
  std::optional<FitBounds> bounds;
  int max_iterations = 200;
  // Stop when an accepted step changes the SSE by less than this fraction.
  double tolerance = 1e-10;
  double damping_init = 1e-3;
  // Also start from the initial k scaled by 1.5 and 0.5 and keep the best.
  bool multi_start = true;

  void validate() const;
};

struct FitResult {
  GrowthParams params{ModelFamily::Logistic, 1.0, 1.0, 0.0};
  double sse = 0.0;
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;
  // A parameter finished on a bound or the normal matrix is singular.
  bool degenerate = false;
  // (J^T J)^-1 * sse / (n - 3), NaN when J^T J is singular.
  std::array<std::array<double, 3>, 3> covariance_proxy{};
  // SSE at the start and after every accepted step.
  std::vector<double> sse_trace;
};

// Unweighted least squares fit of a growth curve by damped Gauss-Newton
// (Levenberg-Marquardt with Marquardt's diagonal scaling), bounds enforced by
// projection. Runs up to three starts and returns the lowest-SSE result
// (ties: lowest k). Throws InsufficientDataError for fewer than 10
// observations and DomainError for non-positive x or y.
FitResult fit(std::span<const Observation> data, const FitConfig& config);

// One Levenberg-Marquardt run from a given start.
FitResult fit_from(std::span<const Observation> data, const GrowthParams& start, const FitBounds& bounds,
                   const FitConfig& config);

// Heuristic start: L = 1.05 max y, k = 2 / range(x), x0 = 0.25 * q01(x) for
// Von Bertalanffy and median(x) - 2/k for the logistic. Clamped to the
// default bounds. Throws DegenerateError when all x are equal.
GrowthParams auto_init(std::span<const Observation> data, ModelFamily family);

double sum_squared_residuals(std::span<const Observation> data, const GrowthParams& params);

// Fitted record for the internal-unit JSON output.
struct FittedRecord {
  Sex sex = Sex::Male;
  DatasetVariant dataset = DatasetVariant::Original;
  std::size_t n = 0;
  FitResult result;
};

// Full-precision JSON: family, sex, dataset, L, k, x0 (kg units) plus the
// table-unit coefficients and sse, rmse, iterations, converged.
std::string fit_results_json(std::span<const FittedRecord> records);

}  // namespace liftcurve
