#include "liftcurve/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "liftcurve/error.hpp"
#include "liftcurve/stats.hpp"

namespace liftcurve {

namespace {

constexpr double kMaxDamping = 1e16;
constexpr double kMinDamping = 1e-12;
// Relative eigenvalue floor of the scaled normal matrix below which it is
// treated as singular.
constexpr double kSingularity = 1e-12;

void check_data(std::span<const Observation> data) {
  if (data.size() < kMinFitObservations) {
    throw InsufficientDataError("fitting needs at least " + std::to_string(kMinFitObservations) +
                                " observations, got " + std::to_string(data.size()));
  }
  for (const auto& o : data) {
    if (!(o.x > 0.0) || !(o.y > 0.0) || !std::isfinite(o.x) || !std::isfinite(o.y)) {
      throw DomainError("fitting needs finite positive bodyweights and totals");
    }
  }
}

struct Linearization {
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();  // J^T J
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // J^T r
};

Linearization linearize(std::span<const Observation> data, const GrowthParams& p) {
  Linearization lin;
  for (const auto& o : data) {
    const auto g = parameter_gradient(p, o.x);
    const Eigen::Vector3d row(g[0], g[1], g[2]);
    const double r = o.y - eval(p, o.x);
    lin.normal.noalias() += row * row.transpose();
    lin.gradient.noalias() += r * row;
  }
  return lin;
}

GrowthParams project(const GrowthParams& p, const Eigen::Vector3d& v, const FitBounds& b) {
  return p.with_values(b.L.clamp(v[0]), b.k.clamp(v[1]), b.x0.clamp(v[2]));
}

bool on_bound(const GrowthParams& p, const FitBounds& b) {
  return p.L() == b.L.lo || p.L() == b.L.hi || p.k() == b.k.lo || p.k() == b.k.hi ||
         p.x0() == b.x0.lo || p.x0() == b.x0.hi;
}

// Fills the covariance proxy; returns false when J^T J is numerically singular.
bool covariance(const Eigen::Matrix3d& normal, double sse, std::size_t n,
                std::array<std::array<double, 3>, 3>& out) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& row : out) row.fill(nan);
  const Eigen::Vector3d diag = normal.diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) return false;
  const Eigen::Vector3d inv_sqrt = diag.cwiseSqrt().cwiseInverse();
  const Eigen::Matrix3d scaled = inv_sqrt.asDiagonal() * normal * inv_sqrt.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scaled, Eigen::EigenvaluesOnly);
  const auto values = eig.eigenvalues();
  if (!(values.minCoeff() > kSingularity * values.maxCoeff())) return false;
  const double variance = n > 3 ? sse / static_cast<double>(n - 3) : nan;
  const Eigen::Matrix3d cov =
      inv_sqrt.asDiagonal() * scaled.inverse() * inv_sqrt.asDiagonal() * variance;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i][j] = cov(i, j);
  }
  return true;
}

}  // namespace

std::vector<Observation> observations(std::span<const LifterEntry> entries) {
  std::vector<Observation> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({e.bodyweight_kg, e.total_kg});
  return out;
}

FitBounds FitBounds::defaults_for(std::span<const Observation> data) {
  double max_y = 0.0;
  double min_x = std::numeric_limits<double>::infinity();
  for (const auto& o : data) {
    max_y = std::max(max_y, o.y);
    min_x = std::min(min_x, o.x);
  }
  if (data.empty()) min_x = 0.0;
  // L must stay strictly positive; use a tiny fraction of the data scale.
  return {{1e-9 * std::max(max_y, 1.0), 3.0 * std::max(max_y, 1.0)}, {1e-4, 1.0}, {-100.0, min_x + 100.0}};
}

void FitBounds::validate() const {
  for (const auto* b : {&L, &k, &x0}) {
    if (!(b->lo < b->hi)) throw ConfigError("fit bounds must satisfy lo < hi");
  }
  if (!(L.lo > 0.0) || !(k.lo > 0.0)) throw ConfigError("lower bounds of L and k must be positive");
}

void FitConfig::validate() const {
  if (!(tolerance > 0.0)) throw ConfigError("fit tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(damping_init > 0.0)) throw ConfigError("initial damping must be positive");
  if (bounds) bounds->validate();
  if (init && init->family() != family) throw ConfigError("initial parameters belong to another family");
}

double sum_squared_residuals(std::span<const Observation> data, const GrowthParams& params) {
  double sse = 0.0;
  for (const auto& o : data) {
    const double r = o.y - eval(params, o.x);
    sse += r * r;
  }
  return sse;
}

GrowthParams auto_init(std::span<const Observation> data, ModelFamily family) {
  check_data(data);
  std::vector<double> xs;
  xs.reserve(data.size());
  double max_y = 0.0;
  for (const auto& o : data) {
    xs.push_back(o.x);
    max_y = std::max(max_y, o.y);
  }
  std::sort(xs.begin(), xs.end());
  const double range = xs.back() - xs.front();
  if (!(range > 0.0)) throw DegenerateError("all bodyweights are equal; the curve is not identifiable");

  const FitBounds bounds = FitBounds::defaults_for(data);
  const double L = 1.05 * max_y;
  const double k = 2.0 / range;
  const double x0 = family == ModelFamily::VonBertalanffy ? 0.25 * quantile_sorted(xs, 0.01)
                                                         : quantile_sorted(xs, 0.5) - 2.0 / k;
  return GrowthParams(family, bounds.L.clamp(L), bounds.k.clamp(k), bounds.x0.clamp(x0));
}

FitResult fit_from(std::span<const Observation> data, const GrowthParams& start, const FitBounds& bounds,
                   const FitConfig& config) {
  check_data(data);
  config.validate();
  bounds.validate();

  GrowthParams p = project(start, Eigen::Vector3d(start.L(), start.k(), start.x0()), bounds);
  double sse = sum_squared_residuals(data, p);
  double scale = 0.0;
  for (const auto& o : data) scale += o.y * o.y;

  double damping = config.damping_init;
  int iterations = 0;
  bool converged = sse <= 1e-28 * scale;
  bool stalled = false;
  Linearization lin = linearize(data, p);
  std::vector<double> trace{sse};

  while (!converged && !stalled && iterations < config.max_iterations) {
    ++iterations;
    const Eigen::Vector3d diag = lin.normal.diagonal();
    const double floor = std::max(diag.maxCoeff(), 1.0) * 1e-15;
    const Eigen::Vector3d current(p.L(), p.k(), p.x0());
    for (;;) {
      Eigen::Matrix3d damped = lin.normal;
      for (int i = 0; i < 3; ++i) damped(i, i) += damping * std::max(diag[i], floor);
      const Eigen::LDLT<Eigen::Matrix3d> solver(damped);
      const Eigen::Vector3d step = solver.solve(lin.gradient);
      if (solver.info() == Eigen::Success && step.allFinite()) {
        const GrowthParams trial = project(p, current + step, bounds);
        const double trial_sse = sum_squared_residuals(data, trial);
        if (trial_sse <= sse) {
          const double change = sse > 0.0 ? (sse - trial_sse) / sse : 0.0;
          p = trial;
          sse = trial_sse;
          trace.push_back(sse);
          damping = std::max(damping / 10.0, kMinDamping);
          converged = change < config.tolerance || sse <= 1e-28 * scale;
          lin = linearize(data, p);
          break;
        }
      }
      damping *= 10.0;
      if (damping > kMaxDamping) {
        stalled = true;
        break;
      }
    }
  }

  FitResult result;
  result.params = p;
  result.sse = sse;
  result.rmse = std::sqrt(sse / static_cast<double>(data.size()));
  result.iterations = iterations;
  result.converged = converged;
  result.sse_trace = std::move(trace);
  const bool regular = covariance(lin.normal, sse, data.size(), result.covariance_proxy);
  result.degenerate = !regular || on_bound(p, bounds);
  return result;
}

FitResult fit(std::span<const Observation> data, const FitConfig& config) {
  check_data(data);
  config.validate();
  const FitBounds bounds = config.bounds.value_or(FitBounds::defaults_for(data));
  const GrowthParams base = config.init.value_or(auto_init(data, config.family));

  std::vector<GrowthParams> starts{base};
  if (config.multi_start) {
    for (double factor : {1.5, 0.5}) {
      starts.push_back(base.with_values(base.L(), bounds.k.clamp(base.k() * factor), base.x0()));
    }
  }

  std::optional<FitResult> best;
  for (const auto& start : starts) {
    FitResult r = fit_from(data, start, bounds, config);
    if (!best || r.sse < best->sse || (r.sse == best->sse && r.params.k() < best->params.k())) {
      best = std::move(r);
    }
  }
  return *best;
}

std::string fit_results_json(std::span<const FittedRecord> records) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& rec : records) {
    const auto& p = rec.result.params;
    const TableCoefficients t = to_table_units(p);
    nlohmann::ordered_json row;
    row["family"] = family_name(p.family());
    row["sex"] = sex_code(rec.sex);
    row["dataset"] = dataset_name(rec.dataset);
    row["n"] = rec.n;
    row["L"] = p.L();
    row["k"] = p.k();
    row["x0"] = p.x0();
    row["L_1e2kg"] = t.L_1e2kg;
    row["k_1e-2perkg"] = t.k_1e2_per_kg;
    row["x0_kg"] = t.x0_kg;
    row["sse"] = rec.result.sse;
    row["rmse"] = rec.result.rmse;
    row["iterations"] = rec.result.iterations;
    row["converged"] = rec.result.converged;
    row["degenerate"] = rec.result.degenerate;
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

}  // namespace liftcurve
