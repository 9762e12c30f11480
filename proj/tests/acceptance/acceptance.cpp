// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "liftcurve/diagnostics.hpp"
#include "liftcurve/error.hpp"
#include "liftcurve/fit.hpp"
#include "liftcurve/hash.hpp"
#include "liftcurve/kde.hpp"
#include "liftcurve/models.hpp"
#include "liftcurve/resample.hpp"
#include "liftcurve/scoring.hpp"
#include "liftcurve/stats.hpp"
#include "test_support.hpp"

using namespace liftcurve;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

// ------------------------------------------------------------ 1

void synthetic_recovery(Outcome& o) {
  const GrowthParams truth(ModelFamily::Logistic, 722.3, 0.05447, 53.4);
  testsupport::Draws d(20240601);
  std::vector<Observation> data;
  for (int i = 0; i < 10000; ++i) {
    const double x = d.uniform(40, 180);
    data.push_back({x, eval(truth, x) + d.normal(0, 30)});
  }
  const auto t0 = Clock::now();
  const auto r = fit(data, FitConfig{});
  const double secs = seconds_since(t0);
  const double eL = std::abs(r.params.L() / truth.L() - 1);
  const double ek = std::abs(r.params.k() / truth.k() - 1);
  const double ex = std::abs(r.params.x0() / truth.x0() - 1);
  o.detail << "rel err L=" << fmt(eL, 3) << " k=" << fmt(ek, 3) << " x0=" << fmt(ex, 3) << ", " << fmt(secs, 3)
           << " s";
  o.require(eL < 0.02 && ek < 0.02 && ex < 0.02, "parameter within 2%");
  o.require(r.converged, "converged");
  o.require(secs < 5.0, "runtime < 5 s");
}

// ------------------------------------------------------------ 2

long double eval_ld(const GrowthParams& p, long double x) {
  const long double L = p.L(), k = p.k(), x0 = p.x0();
  if (p.family() == ModelFamily::VonBertalanffy) return L * (1.0L - std::exp(-k * (x - x0)));
  auto s = [](long double z) { return 1.0L / (1.0L + std::exp(-z)); };
  return L * (s(k * (x - x0)) - s(-k * x0));
}

void derivative_correctness(Outcome& o) {
  testsupport::Draws d(99);
  double worst1 = 0.0, worst2 = 0.0;
  for (auto family : {ModelFamily::VonBertalanffy, ModelFamily::Logistic}) {
    for (int i = 0; i < 100; ++i) {
      const GrowthParams p(family, d.uniform(400, 1100), d.uniform(0.015, 0.06), d.uniform(10, 60));
      const double x = d.uniform(20, 200);
      const long double h1 = 1e-5L * std::max(1.0, std::abs(x));
      const long double fd1 = (eval_ld(p, x + h1) - eval_ld(p, x - h1)) / (2 * h1);
      const long double h2 = 1e-3L * std::max(1.0, std::abs(x));
      const long double fd2 = (eval_ld(p, x + h2) - 2 * eval_ld(p, x) + eval_ld(p, x - h2)) / (h2 * h2);
      const double a1 = first_derivative(p, x), a2 = second_derivative(p, x);
      worst1 = std::max(worst1, std::abs(a1 - static_cast<double>(fd1)) / std::abs(a1));
      worst2 = std::max(worst2, std::abs(a2 - static_cast<double>(fd2)) / std::abs(a2));
    }
  }
  o.detail << "max rel err f'=" << fmt(worst1, 3) << " f''=" << fmt(worst2, 3) << " over 200 draws";
  o.require(worst1 < 1e-6, "first derivative < 1e-6");
  o.require(worst2 < 1e-4, "second derivative < 1e-4");
}

// ------------------------------------------------------------ 3

void structural_invariants(Outcome& o) {
  testsupport::Draws d(7);
  double worst_f0 = 0.0, worst_vb = 0.0, worst_gl = 0.0, worst_sign = 0.0;
  bool single_change = true;
  for (int i = 0; i < 100; ++i) {
    const GrowthParams lg(ModelFamily::Logistic, d.uniform(400, 1100), d.uniform(0.02, 0.08), d.uniform(10, 60));
    worst_f0 = std::max(worst_f0, std::abs(eval(lg, 0.0)) / lg.L());

    const double step = 0.01;
    const double lo = std::max(0.0, lg.x0() - 50.0);
    const auto n = static_cast<int>(std::round((lg.x0() + 50.0 - lo) / step));
    int changes = 0;
    double prev = 0.0, where = 0.0;
    for (int j = 1; j < n; ++j) {
      const double x = lo + j * step;
      const double dd = eval(lg, x + step) - 2 * eval(lg, x) + eval(lg, x - step);
      const double s = dd > 0 ? 1.0 : (dd < 0 ? -1.0 : 0.0);
      if (s != 0.0 && prev != 0.0 && s != prev) {
        ++changes;
        where = x;
      }
      if (s != 0.0) prev = s;
    }
    single_change = single_change && changes == 1;
    worst_sign = std::max(worst_sign, std::abs(where - lg.x0()));

    const GrowthParams vb(ModelFamily::VonBertalanffy, d.uniform(400, 1100), d.uniform(0.01, 0.06),
                          d.uniform(-20, 25));
    const double x = d.uniform(30, 250);
    // L - f in long double; in double it cancels once f is close to L
    const double expect = static_cast<double>(vb.k() * (vb.L() - eval_ld(vb, x)));
    worst_vb = std::max(worst_vb, std::abs(first_derivative(vb, x) - expect) / std::abs(expect));

    const GlCoefficients gl{vb.L(), vb.L() * std::exp(vb.k() * vb.x0()), vb.k(), {}};
    const double y = d.uniform(200, 1000);
    const double a = gl_score(x, y, gl), b = model_score(x, y, vb);
    worst_gl = std::max(worst_gl, std::abs(a - b) / b);
  }
  o.detail << "|f(0)|/L=" << fmt(worst_f0, 3) << ", sign change off x0 by <= " << fmt(worst_sign, 3)
           << " kg, VB f'=k(L-f) rel " << fmt(worst_vb, 3) << ", GL/VB rel " << fmt(worst_gl, 3);
  o.require(worst_f0 < 1e-12, "logistic f(0)");
  o.require(single_change && worst_sign <= 0.01 + 1e-9, "single sign change within one grid step");
  o.require(worst_vb < 1e-10, "VB derivative identity");
  o.require(worst_gl < 1e-10, "GL/VB equivalence");
}

// ------------------------------------------------------------ 4

void kde_correctness(Outcome& o) {
  const auto xs = testsupport::bimodal_bodyweights(20000, 11);
  const auto m = KdeModel::fit(xs);
  const double h = m.bandwidth();
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const auto grid = linear_grid(*mn - 8 * h, *mx + 8 * h, h / 10);
  const auto g = m.density_batch(grid);
  double integral = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) integral += 0.5 * (g[i] + g[i - 1]) * (grid[i] - grid[i - 1]);

  const std::vector<double> two = {-1.0, 1.0};
  const double two_point_err = std::abs(KdeModel(two, 1.0).density(0.0) - 0.24197072451914335);

  testsupport::Draws d(12);
  std::vector<double> pts(1000);
  for (auto& p : pts) p = d.normal(85, 18);
  const KdeModel model(pts, 2.5);
  std::vector<double> queries(1000000);
  for (auto& q : queries) q = d.uniform(20, 200);
  const auto batch = model.density_batch(queries);
  double worst = 0.0;
  const double norm = 1.0 / (1000.0 * 2.5 * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < queries.size(); ++i) {
    double s = 0.0;
    for (double p : pts) {
      const double u = (p - queries[i]) / 2.5;
      s += std::exp(-0.5 * u * u);
    }
    const double ref = s * norm;
    worst = std::max(worst, std::abs(batch[i] - ref) / ref);
  }
  o.detail << "integral-1=" << fmt(integral - 1.0, 3) << ", two-point err " << fmt(two_point_err, 3)
           << ", batch vs naive max rel " << fmt(worst, 3) << " on 1e6 points";
  o.require(std::abs(integral - 1.0) < 1e-3, "integral");
  o.require(two_point_err < 1e-12, "two-point closed form");
  o.require(worst < 1e-12, "batch equals naive");
}

// ------------------------------------------------------------ 5

void resampling_flattening(Outcome& o) {
  const auto xs = testsupport::bimodal_bodyweights(50000, 77);
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double lo = quantile_sorted(sorted, 0.005);
  const double hi = quantile_sorted(sorted, 0.995);
  const auto entries = testsupport::entries_at(xs);
  ResamplePlan plan;
  plan.k = xs.size();
  plan.seed = 42;
  const auto a = inverse_density_resample(entries, plan);
  const auto b = inverse_density_resample(entries, plan);
  const double before = testsupport::chi_square_uniform(xs, lo, hi, 20);
  const double after = testsupport::chi_square_uniform(bodyweights(a.entries), lo, hi, 20);
  bool identical = a.entries.size() == b.entries.size();
  for (std::size_t i = 0; identical && i < a.entries.size(); ++i) {
    identical = std::memcmp(&a.entries[i].bodyweight_kg, &b.entries[i].bodyweight_kg, sizeof(double)) == 0 &&
                a.entries[i] == b.entries[i];
  }
  o.detail << "chi2 original=" << fmt(before, 5) << " resampled=" << fmt(after, 5) << " (ratio "
           << fmt(after / before, 3) << "), same seed identical=" << (identical ? "yes" : "no");
  o.require(after < 0.25 * before, "ratio < 0.25");
  o.require(identical, "bit-identical");
}

// ------------------------------------------------------------ 6

std::optional<fs::path> snapshot_path(std::string& why) {
  fs::path csv = fs::path(LIFTCURVE_SOURCE_DIR) / "data" / "snapshot" / "openpowerlifting.csv";
  if (const char* env = std::getenv("LIFTCURVE_SNAPSHOT"); env && *env) csv = env;
  const fs::path pin = fs::path(LIFTCURVE_SOURCE_DIR) / "data" / "snapshot" / "SHA256";
  if (!fs::exists(pin)) {
    why = "no pinned snapshot hash at data/snapshot/SHA256";
    return std::nullopt;
  }
  if (!fs::exists(csv)) {
    why = "snapshot CSV not found at " + csv.string();
    return std::nullopt;
  }
  std::string expected = testsupport::read_file(pin);
  expected = expected.substr(0, expected.find_first_of(" \n\r\t"));
  const std::string actual = file_sha256(csv);
  if (actual != expected) {
    why = "snapshot hash " + actual + " does not match pinned " + expected;
    return std::nullopt;
  }
  return csv;
}

struct PipelineReport {
  double male_logistic_x0 = 0.0;
  double male_vb_L = 0.0;
  double male_below = 0.0;
  double skew_f = 0.0;
  double skew_m = 0.0;
  double seconds = 0.0;
};

PipelineReport full_pipeline(const fs::path& csv) {
  const auto t0 = Clock::now();
  PipelineReport rep;
  const auto ingested = parse_csv(csv, FilterPolicy{});
  for (Sex sex : {Sex::Female, Sex::Male}) {
    std::vector<LifterEntry> rows;
    for (const auto& e : ingested.entries) {
      if (e.sex == sex) rows.push_back(e);
    }
    ResamplePlan plan;
    plan.k = 100000;
    plan.seed = derive_seed(42, std::string("resample/") + std::string(sex_code(sex)));
    KdeOptions kde;
    kde.subsample_seed = derive_seed(42, std::string("kde-subsample/") + std::string(sex_code(sex)));
    const auto resampled = inverse_density_resample(rows, plan, kde);
    FitConfig lg;
    const auto logistic = fit(observations(resampled.entries), lg);
    FitConfig vb;
    vb.family = ModelFamily::VonBertalanffy;
    const auto von = fit(observations(rows), vb);

    std::vector<double> scores;
    scores.reserve(rows.size());
    for (const auto& e : rows) scores.push_back(model_score(e.bodyweight_kg, e.total_kg, logistic.params));
    const double skew = score_distribution(scores).skewness;
    if (sex == Sex::Male) {
      rep.male_logistic_x0 = logistic.params.x0();
      rep.male_vb_L = von.params.L();
      rep.male_below = fraction_below(rows, 53.4);
      rep.skew_m = skew;
    } else {
      rep.skew_f = skew;
    }
  }
  rep.seconds = seconds_since(t0);
  return rep;
}

// Realistic-size stand-in used only to report runtime when no snapshot exists.
fs::path synthetic_standin(const fs::path& dir) {
  const GrowthParams male(ModelFamily::Logistic, 722.3, 0.05447, 53.4);
  const GrowthParams female(ModelFamily::Logistic, 630.8, 0.032019, 25.87);
  testsupport::Draws d(31337);
  std::vector<LifterEntry> rows;
  for (int i = 0; i < 600000; ++i) {
    const bool is_male = i % 3 != 0;
    const double x = std::clamp(is_male ? d.normal(88, 17) : d.normal(68, 13), 40.0, 200.0);
    const double y = std::max(60.0, eval(is_male ? male : female, x) + d.normal(0, is_male ? 90 : 60));
    rows.push_back(testsupport::entry(is_male ? Sex::Male : Sex::Female, std::round(x * 10) / 10,
                                      std::round(y * 2) / 2));
  }
  const fs::path path = dir / "standin.csv";
  testsupport::write_file(path, testsupport::upstream_csv(rows));
  return path;
}

void pinned_snapshot(Outcome& o) {
  std::string why;
  const auto csv = snapshot_path(why);
  if (!csv) {
    testsupport::TempDir tmp;
    const auto rep = full_pipeline(synthetic_standin(tmp.path()));
    o.detail << "snapshot unavailable: " << why << "; informational: pipeline on a 600k-row synthetic stand-in took "
             << fmt(rep.seconds, 3) << " s";
    o.require(false, "pinned snapshot required");
    return;
  }
  const auto rep = full_pipeline(*csv);
  o.detail << "male logistic x0=" << fmt(rep.male_logistic_x0) << " kg, male VB L=" << fmt(rep.male_vb_L)
           << " kg, males below 53.4 kg=" << fmt(100 * rep.male_below, 3) << "%, |skew| F=" << fmt(std::abs(rep.skew_f), 3)
           << " M=" << fmt(std::abs(rep.skew_m), 3) << ", " << fmt(rep.seconds, 3) << " s";
  o.require(rep.male_logistic_x0 >= 40 && rep.male_logistic_x0 <= 65, "male logistic x0 in [40, 65]");
  o.require(rep.male_vb_L >= 600 && rep.male_vb_L <= 900, "male VB L in [600, 900]");
  o.require(rep.male_below >= 0.0005 && rep.male_below <= 0.01, "fraction below 53.4 kg in [0.05%, 1%]");
  o.require(std::abs(rep.skew_f) > std::abs(rep.skew_m), "female skewness exceeds male");
  o.require(rep.seconds < 300, "runtime < 5 min");
}

// ------------------------------------------------------------ 7

double np_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

void diagnostics_oracles(Outcome& o) {
  testsupport::Draws d(5);
  std::vector<ScoredEntry> sample;
  for (int i = 0; i < 1000; ++i) {
    sample.push_back({testsupport::entry(Sex::Male, std::round(d.uniform(50, 150)), 600), d.normal(100, 15)});
  }
  const auto q = rolling_quantiles(sample, 100);
  std::vector<std::size_t> order(sample.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return sample[a].entry.bodyweight_kg < sample[b].entry.bodyweight_kg;
  });
  std::size_t mismatches = 0;
  for (std::size_t s = 0; s < q.rows.size(); ++s) {
    std::vector<double> scores;
    for (std::size_t i = s; i < s + 100; ++i) scores.push_back(sample[order[i]].score);
    for (std::size_t l = 0; l < q.levels.size(); ++l) {
      if (q.rows[s].values[l] != np_quantile(scores, q.levels[l])) ++mismatches;
    }
  }

  CounterStream stream(2024);
  std::vector<double> normal(100000);
  for (std::size_t i = 0; i < normal.size(); ++i) normal[i] = stream.normal(i, 0);
  const double skew = score_distribution(normal).skewness;

  std::vector<LifterEntry> linear;
  for (int i = 0; i < 35000; ++i) {
    const double x = d.uniform(45, 180);
    linear.push_back(testsupport::entry(Sex::Male, x, 5 * x));
  }
  double worst = 0.0;
  for (const auto& b : myriad_averages(linear).bins) {
    worst = std::max(worst, std::abs(b.mean_total_kg - 5 * b.mean_bodyweight_kg) / b.mean_total_kg);
  }
  o.detail << q.rows.size() << " windows, " << mismatches << " quantile mismatches; normal skewness "
           << fmt(skew, 3) << "; myriad 5x rel err " << fmt(worst, 3);
  o.require(mismatches == 0 && q.rows.size() == 901, "rolling quantiles exact");
  o.require(std::abs(skew) < 0.03, "skewness within 0.03");
  o.require(worst < 1e-9, "myriad linear generator");
}

// ------------------------------------------------------------ 8

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "liftcurve");
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& f : fs::directory_iterator(dir)) files[f.path().filename().string()] = testsupport::read_file(f.path());
  return files;
}

void end_to_end_determinism(Outcome& o) {
  testsupport::TempDir tmp;
  const GrowthParams male(ModelFamily::Logistic, 722.3, 0.05447, 53.4);
  const GrowthParams female(ModelFamily::Logistic, 630.8, 0.032019, 25.87);
  testsupport::Draws d(8);
  std::vector<LifterEntry> rows;
  for (int i = 0; i < 20000; ++i) {
    const bool m = i % 2 == 0;
    const double x = std::max(40.0, m ? d.normal(88, 15) : d.normal(67, 12));
    rows.push_back(testsupport::entry(m ? Sex::Male : Sex::Female, x, eval(m ? male : female, x) + d.normal(0, 40)));
  }
  testsupport::write_file(tmp / "raw.csv", testsupport::upstream_csv(rows));
  const std::string out = (tmp / "out").string();

  std::vector<std::vector<std::string>> steps = {
      {"ingest", "--input", (tmp / "raw.csv").string(), "--output-dir", out},
      {"fit", "--input", out + "/entries.csv", "--resample", "100000", "--seed", "42", "--output-dir", out},
      {"score", "--input", out + "/entries.csv", "--system", "model", "--params", out + "/coefficients.json",
       "--output-dir", out},
      {"diagnose", "--input", out + "/scored.csv", "--below", "53.4", "--output-dir", out},
  };
  for (const auto& s : steps) {
    if (cli(s) != 0) {
      o.require(false, "pipeline step '" + s[0] + "' exited non-zero");
      return;
    }
  }
  const auto first = snapshot_dir(tmp / "out");
  for (const char* manifest : {"ingest", "fit", "score", "diagnose"}) {
    if (cli({"replay", out + "/" + manifest + ".manifest.json"}) != 0) {
      o.require(false, std::string("replay of ") + manifest + " failed");
      return;
    }
  }
  const auto second = snapshot_dir(tmp / "out");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  o.detail << first.size() << " output files compared after replaying 4 manifests, " << differing << " differ";
  o.require(differing == 0 && first.size() == second.size(), "byte-identical outputs");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"synthetic logistic recovery", synthetic_recovery},
      {"derivative correctness", derivative_correctness},
      {"structural invariants", structural_invariants},
      {"KDE correctness", kde_correctness},
      {"resampling flattening", resampling_flattening},
      {"pinned-snapshot envelope", pinned_snapshot},
      {"diagnostics oracles", diagnostics_oracles},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
