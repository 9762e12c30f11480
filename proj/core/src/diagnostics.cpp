#include "liftcurve/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "liftcurve/csv.hpp"
#include "liftcurve/error.hpp"
#include "liftcurve/stats.hpp"

namespace liftcurve {

namespace {

// Indices of entries ordered by bodyweight; stable, so ties keep input order.
template <typename Key>
std::vector<std::size_t> sorted_order(std::size_t n, Key key) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a, b); });
  return order;
}

std::string level_label(double level) { return "q" + csv::format_shortest(level); }

}  // namespace

MyriadBins myriad_averages(std::span<const LifterEntry> entries, std::size_t group_size) {
  if (entries.empty()) throw InsufficientDataError("myriad averages need at least one entry");
  if (group_size == 0) throw ConfigError("myriad group size must be positive");

  const auto order = sorted_order(entries.size(), [&](std::size_t a, std::size_t b) {
    const auto& ea = entries[a];
    const auto& eb = entries[b];
    if (ea.bodyweight_kg != eb.bodyweight_kg) return ea.bodyweight_kg < eb.bodyweight_kg;
    return ea.total_kg < eb.total_kg;
  });

  // Group boundaries: full groups, then the remainder either as its own bin
  // or folded into the last full one.
  const std::size_t n = entries.size();
  std::vector<std::size_t> ends;
  for (std::size_t end = group_size; end <= n; end += group_size) ends.push_back(end);
  const std::size_t remainder = n % group_size;
  if (remainder > 0) {
    if (ends.empty() || remainder * 10 >= group_size) {
      ends.push_back(n);
    } else {
      ends.back() = n;
    }
  }

  MyriadBins out;
  out.group_size = group_size;
  std::size_t begin = 0;
  for (std::size_t end : ends) {
    double sum_bw = 0.0;
    double sum_total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      sum_bw += entries[order[i]].bodyweight_kg;
      sum_total += entries[order[i]].total_kg;
    }
    const auto count = static_cast<double>(end - begin);
    out.bins.push_back({sum_bw / count, sum_total / count, end - begin});
    begin = end;
  }
  return out;
}

std::vector<double> default_quantile_levels() { return {0.05, 0.25, 0.5, 0.75, 0.95}; }

RollingQuantiles rolling_quantiles(std::span<const ScoredEntry> scored, std::size_t window,
                                   std::vector<double> levels) {
  if (window < 2) throw ConfigError("rolling window must be at least 2");
  if (levels.empty()) throw ConfigError("at least one quantile level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw ConfigError("quantile levels must lie in (0, 1)");
    if (i > 0 && !(levels[i] > levels[i - 1])) throw ConfigError("quantile levels must be strictly increasing");
  }
  if (scored.size() < window) {
    throw InsufficientDataError("rolling quantiles need at least " + std::to_string(window) + " results, got " +
                                std::to_string(scored.size()));
  }

  const auto order = sorted_order(scored.size(), [&](std::size_t a, std::size_t b) {
    return scored[a].entry.bodyweight_kg < scored[b].entry.bodyweight_kg;
  });
  std::vector<double> bw(order.size());
  std::vector<double> score(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    bw[i] = scored[order[i]].entry.bodyweight_kg;
    score[i] = scored[order[i]].score;
  }

  RollingQuantiles out;
  out.window = window;
  out.levels = std::move(levels);
  out.rows.reserve(scored.size() - window + 1);

  // Sorted copy of the scores inside the current window.
  std::vector<double> current(score.begin(), score.begin() + static_cast<std::ptrdiff_t>(window));
  std::sort(current.begin(), current.end());
  for (std::size_t start = 0;; ++start) {
    RollingQuantiles::Row row;
    row.center_bodyweight_kg = quantile_sorted(std::span(bw).subspan(start, window), 0.5);
    row.values.reserve(out.levels.size());
    for (double level : out.levels) row.values.push_back(quantile_sorted(current, level));
    out.rows.push_back(std::move(row));

    if (start + window == score.size()) break;
    current.erase(std::lower_bound(current.begin(), current.end(), score[start]));
    const double incoming = score[start + window];
    current.insert(std::upper_bound(current.begin(), current.end(), incoming), incoming);
  }
  return out;
}

ScoreDistribution score_distribution(std::span<const double> scores) {
  const std::size_t n = scores.size();
  if (n < 2) throw InsufficientDataError("score distribution needs at least 2 scores");
  const double count = static_cast<double>(n);
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / count;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double s : scores) {
    const double d = s - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;
  if (!(m2 > 0.0)) throw DegenerateError("scores have zero variance");

  ScoreDistribution out;
  out.n = n;
  out.mean = mean;
  out.std = std::sqrt(m2);
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  out.gaussian_fit = {mean, out.std};

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  std::size_t bins = 0;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr * std::cbrt(1.0 / count);
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  } else {
    bins = static_cast<std::size_t>(std::ceil(std::log2(count))) + 1;
  }
  bins = std::max<std::size_t>(bins, 1);

  Histogram& h = out.histogram;
  h.edges.resize(bins + 1);
  const double step = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + static_cast<double>(i) * step;
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double s : sorted) {
    auto bin = static_cast<std::size_t>((s - lo) / step);
    // Rounding can put a value one bin off its edge-defined home.
    bin = std::min(bin, bins - 1);
    while (bin > 0 && s < h.edges[bin]) --bin;
    while (bin + 1 < bins && s >= h.edges[bin + 1]) ++bin;
    ++h.counts[bin];
  }
  return out;
}

std::vector<double> scores_of(std::span<const ScoredEntry> scored) {
  std::vector<double> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.score);
  return out;
}

double fraction_below(std::span<const LifterEntry> entries, double threshold_kg) {
  if (entries.empty()) throw InsufficientDataError("fraction_below needs at least one entry");
  const auto below = std::count_if(entries.begin(), entries.end(),
                                   [&](const LifterEntry& e) { return e.bodyweight_kg < threshold_kg; });
  return static_cast<double>(below) / static_cast<double>(entries.size());
}

void write_myriad_csv(std::ostream& out, const MyriadBins& bins) {
  out << "bin,mean_bodyweight_kg,mean_total_kg,count\n";
  for (std::size_t i = 0; i < bins.bins.size(); ++i) {
    const auto& b = bins.bins[i];
    out << i << ',' << csv::format_shortest(b.mean_bodyweight_kg) << ','
        << csv::format_shortest(b.mean_total_kg) << ',' << b.count << '\n';
  }
}

void write_quantiles_csv(std::ostream& out, const RollingQuantiles& q) {
  out << "window_start,center_bodyweight_kg";
  for (double level : q.levels) out << ',' << level_label(level);
  out << '\n';
  for (std::size_t i = 0; i < q.rows.size(); ++i) {
    out << i << ',' << csv::format_shortest(q.rows[i].center_bodyweight_kg);
    for (double v : q.rows[i].values) out << ',' << csv::format_shortest(v);
    out << '\n';
  }
}

void write_distribution_csv(std::ostream& out, const ScoreDistribution& dist) {
  out << "bin_lo,bin_hi,count,gaussian_expected\n";
  const auto& h = dist.histogram;
  const double n = static_cast<double>(dist.n);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double lo = h.edges[i];
    const double hi = h.edges[i + 1];
    const double expected = n * (normal_cdf((hi - dist.gaussian_fit.mean) / dist.gaussian_fit.std) -
                                 normal_cdf((lo - dist.gaussian_fit.mean) / dist.gaussian_fit.std));
    out << csv::format_shortest(lo) << ',' << csv::format_shortest(hi) << ',' << h.counts[i] << ','
        << csv::format_shortest(expected) << '\n';
  }
}

}  // namespace liftcurve
