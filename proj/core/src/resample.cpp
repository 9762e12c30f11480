#include "liftcurve/resample.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "liftcurve/error.hpp"
#include "liftcurve/random.hpp"

namespace liftcurve {

namespace {

constexpr std::uint64_t kSelectionLane = 0;
// Jitter attempt a uses lane kJitterLane + a.
constexpr std::uint64_t kJitterLane = 1;
constexpr int kMaxJitterAttempts = 1000;

}  // namespace

void ResamplePlan::validate() const {
  if (k < 1) throw ConfigError("resample size k must be at least 1");
  if (jitter_std_kg && !(*jitter_std_kg >= 0.0 && std::isfinite(*jitter_std_kg))) {
    throw ConfigError("jitter std must be a nonnegative finite number");
  }
  if (!(weight_floor >= 0.0)) throw ConfigError("weight floor must be nonnegative");
}

std::vector<double> compute_weights(std::span<const LifterEntry> entries, const KdeModel& kde, double floor) {
  if (!(floor >= 0.0)) throw ConfigError("weight floor must be nonnegative");

  // Evaluate each distinct bodyweight once.
  std::vector<double> distinct = bodyweights(entries);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::vector<double> density = kde.density_batch(distinct);

  std::vector<double> weights;
  weights.reserve(entries.size());
  for (const auto& e : entries) {
    const auto pos = std::lower_bound(distinct.begin(), distinct.end(), e.bodyweight_kg) - distinct.begin();
    const double g = density[static_cast<std::size_t>(pos)];
    if (!std::isfinite(g)) throw Error("internal: non-finite density at bodyweight " + std::to_string(e.bodyweight_kg));
    const double w = 1.0 / std::max(g, floor);
    if (!std::isfinite(w) || !(w > 0.0)) {
      throw Error("internal: weight is not finite; use a positive weight floor");
    }
    weights.push_back(w);
  }
  return weights;
}

std::vector<LifterEntry> resample(std::span<const LifterEntry> entries, std::span<const double> weights,
                                  const ResamplePlan& plan) {
  plan.validate();
  if (entries.empty()) throw InsufficientDataError("cannot resample an empty dataset");
  if (weights.size() != entries.size()) throw ConfigError("one weight per entry is required");

  std::vector<double> cumulative(weights.size());
  double running = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw DomainError("resampling weights must be positive and finite");
    }
    running += weights[i];
    cumulative[i] = running;
  }
  const double total = cumulative.back();
  const double jitter = plan.jitter_std_kg.value_or(0.0);
  const CounterStream stream(plan.seed);

  std::vector<LifterEntry> out;
  out.reserve(plan.k);
  for (std::size_t draw = 0; draw < plan.k; ++draw) {
    const double target = stream.uniform(draw, kSelectionLane) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;  // target rounded up to total
    LifterEntry picked = entries[static_cast<std::size_t>(it - cumulative.begin())];

    if (jitter > 0.0) {
      int attempt = 0;
      double bw = 0.0;
      do {
        if (attempt == kMaxJitterAttempts) {
          throw DomainError("jitter keeps producing non-positive bodyweights; reduce the jitter std");
        }
        bw = picked.bodyweight_kg + jitter * stream.normal(draw, kJitterLane + attempt);
        ++attempt;
      } while (!(bw > 0.0));
      picked.bodyweight_kg = bw;
    }
    out.push_back(std::move(picked));
  }
  return out;
}

ResampleOutcome inverse_density_resample(std::span<const LifterEntry> entries, const ResamplePlan& plan,
                                         const KdeOptions& kde_options) {
  plan.validate();
  if (entries.empty()) throw InsufficientDataError("cannot resample an empty dataset");
  const std::vector<double> xs = bodyweights(entries);
  const KdeModel kde = KdeModel::fit(xs, kde_options);

  ResampleOutcome outcome;
  outcome.bandwidth_kg = kde.bandwidth();
  outcome.jitter_std_kg = plan.jitter_std_kg.value_or(kde.bandwidth());
  outcome.weights = compute_weights(entries, kde, plan.weight_floor);
  ResamplePlan resolved = plan;
  resolved.jitter_std_kg = outcome.jitter_std_kg;
  outcome.entries = resample(entries, outcome.weights, resolved);
  return outcome;
}

std::string resample_sidecar_json(const ResamplePlan& plan, const ResampleOutcome& outcome,
                                  std::size_t source_rows, BandwidthMode mode) {
  nlohmann::ordered_json j;
  j["k"] = plan.k;
  j["seed"] = plan.seed;
  j["jitter_std_kg"] = outcome.jitter_std_kg;
  j["jitter_from_bandwidth"] = !plan.jitter_std_kg.has_value();
  j["weight_floor"] = plan.weight_floor;
  j["bandwidth_kg"] = outcome.bandwidth_kg;
  j["bandwidth_mode"] = mode == BandwidthMode::PaperLiteral ? "paper" : "scaled";
  j["source_rows"] = source_rows;
  j["sampler"] = "philox4x32-10 inverse-cdf";
  return j.dump(2) + "\n";
}

}  // namespace liftcurve
