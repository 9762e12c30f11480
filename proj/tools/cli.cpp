#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "liftcurve/csv.hpp"
#include "liftcurve/diagnostics.hpp"
#include "liftcurve/error.hpp"
#include "liftcurve/fit.hpp"
#include "liftcurve/hash.hpp"
#include "liftcurve/ingest.hpp"
#include "liftcurve/kde.hpp"
#include "liftcurve/models.hpp"
#include "liftcurve/random.hpp"
#include "liftcurve/resample.hpp"
#include "liftcurve/scoring.hpp"

#ifndef LIFTCURVE_DEFAULT_CONFIG
#define LIFTCURVE_DEFAULT_CONFIG "data/coefficients.json"
#endif

namespace liftcurve::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Raised when at least one fit did not converge; outputs are already written.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string input;
  std::string output_dir;
  std::string sex = "both";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--input", c.input, "Input CSV")->required();
  cmd->add_option("--output-dir", c.output_dir, "Directory for outputs")->required();
  cmd->add_option("--sex", c.sex, "F, M or both")->check(CLI::IsMember({"F", "M", "both"}));
  cmd->add_option("--seed", c.seed, "Master seed for all randomness");
}

std::vector<Sex> sexes_for(const std::string& flag) {
  if (flag == "F") return {Sex::Female};
  if (flag == "M") return {Sex::Male};
  return {Sex::Female, Sex::Male};
}

std::optional<Sex> sex_filter(const std::string& flag) {
  if (flag == "both") return std::nullopt;
  return parse_sex(flag);
}

std::string sex_suffix(Sex sex) { return std::string(sex_code(sex)); }

BandwidthMode parse_bandwidth(const std::string& s) {
  return s == "paper" ? BandwidthMode::PaperLiteral : BandwidthMode::StdScaled;
}

// Normalized input from a previous `ingest`: validity checks only.
FilterPolicy permissive_policy(const std::string& sex) {
  FilterPolicy p;
  p.require_raw = false;
  p.require_open_division = false;
  p.require_full_event = false;
  p.sex = sex_filter(sex);
  return p;
}

Json policy_json(const FilterPolicy& p) {
  Json j;
  j["require_raw"] = p.require_raw;
  j["require_open_division"] = p.require_open_division;
  j["require_full_event"] = p.require_full_event;
  j["sex"] = p.sex ? Json(std::string(sex_code(*p.sex))) : Json(nullptr);
  if (p.bodyweight_range) {
    j["bodyweight_range"] = {p.bodyweight_range->first, p.bodyweight_range->second};
  } else {
    j["bodyweight_range"] = nullptr;
  }
  return j;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

template <typename Writer>
void write_with(const fs::path& path, Writer writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

fs::path prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

// Manifest describing one command invocation; written next to its outputs.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args, const Common& common) {
    json_["command"] = std::move(command);
    json_["argv"] = std::vector<std::string>(args.begin() + 1, args.end());
    json_["input"] = common.input;
    json_["input_sha256"] = file_sha256(common.input);
    json_["output_dir"] = common.output_dir;
    json_["seed"] = common.seed;
    json_["sex"] = common.sex;
  }

  Json& operator[](const char* key) { return json_[key]; }
  void output(const std::string& name) { json_["outputs"].push_back(name); }

  void write(const fs::path& dir) const {
    write_file(dir / (json_["command"].get<std::string>() + ".manifest.json"), json_.dump(2) + "\n");
  }

 private:
  Json json_;
};

IngestResult read_entries(const Common& c, const ParseOptions& options = {}) {
  return parse_csv(fs::path(c.input), permissive_policy(c.sex), options);
}

std::vector<LifterEntry> of_sex(std::span<const LifterEntry> entries, Sex sex) {
  std::vector<LifterEntry> out;
  for (const auto& e : entries) {
    if (e.sex == sex) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  Common common;
  std::optional<double> min_bw;
  std::optional<double> max_bw;
  bool keep_equipped = false;
  bool any_division = false;
  bool any_event = false;
};

int cmd_ingest(const IngestArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  FilterPolicy policy;
  policy.require_raw = !a.keep_equipped;
  policy.require_open_division = !a.any_division;
  policy.require_full_event = !a.any_event;
  policy.sex = sex_filter(a.common.sex);
  if (a.min_bw || a.max_bw) {
    policy.bodyweight_range = {a.min_bw.value_or(0.0), a.max_bw.value_or(1e9)};
  }

  const IngestResult result = parse_csv(fs::path(a.common.input), policy);
  const fs::path dir = prepare_output_dir(a.common.output_dir);
  Manifest manifest("ingest", args, a.common);
  manifest["filter_policy"] = policy_json(policy);

  write_normalized_csv(dir / "entries.csv", result.entries);
  write_file(dir / "ingest_stats.json", result.stats.to_json());
  manifest.output("entries.csv");
  manifest.output("ingest_stats.json");
  manifest.write(dir);

  out << "kept " << result.stats.kept << " of " << result.stats.total_rows << " rows\n";
  for (std::size_t i = 0; i < kDropReasonCount; ++i) {
    if (result.stats.dropped[i] > 0) {
      out << "  dropped " << drop_reason_name(static_cast<DropReason>(i)) << ": " << result.stats.dropped[i] << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- resampling shared by fit/resample

struct ResampleArgs {
  std::size_t k = 0;
  std::string bandwidth = "scaled";
  std::optional<double> jitter;
  double weight_floor = kDefaultWeightFloor;
  std::size_t kde_max_points = 500000;
};

void add_resample_options(CLI::App* cmd, ResampleArgs& r) {
  cmd->add_option("--bandwidth", r.bandwidth, "KDE bandwidth rule: paper or scaled")
      ->check(CLI::IsMember({"paper", "scaled"}));
  cmd->add_option("--jitter", r.jitter, "Bodyweight jitter std in kg (default: KDE bandwidth)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--weight-floor", r.weight_floor, "Density floor for resampling weights");
  cmd->add_option("--kde-max-points", r.kde_max_points, "Subsample the KDE above this many points");
}

ResamplePlan make_plan(const ResampleArgs& r, std::uint64_t seed, Sex sex) {
  ResamplePlan plan;
  plan.k = r.k;
  plan.seed = derive_seed(seed, "resample/" + sex_suffix(sex));
  plan.jitter_std_kg = r.jitter;
  plan.weight_floor = r.weight_floor;
  return plan;
}

KdeOptions make_kde_options(const ResampleArgs& r, std::uint64_t seed, Sex sex) {
  KdeOptions o;
  o.mode = parse_bandwidth(r.bandwidth);
  o.max_points = r.kde_max_points;
  o.subsample_seed = derive_seed(seed, "kde-subsample/" + sex_suffix(sex));
  return o;
}

Json resample_json(const ResampleArgs& r) {
  Json j;
  j["k"] = r.k;
  j["bandwidth"] = r.bandwidth;
  j["jitter_std_kg"] = r.jitter ? Json(*r.jitter) : Json("bandwidth");
  j["weight_floor"] = r.weight_floor;
  j["kde_max_points"] = r.kde_max_points;
  return j;
}

// Writes resampled_<sex>.csv and its sidecar; returns the resampled entries.
std::vector<LifterEntry> resample_and_export(std::span<const LifterEntry> entries, const ResampleArgs& r,
                                             std::uint64_t seed, Sex sex, const fs::path& dir,
                                             Manifest& manifest) {
  const ResamplePlan plan = make_plan(r, seed, sex);
  const KdeOptions kde = make_kde_options(r, seed, sex);
  ResampleOutcome outcome = inverse_density_resample(entries, plan, kde);
  const std::string base = "resampled_" + sex_suffix(sex);
  write_normalized_csv(dir / (base + ".csv"), outcome.entries);
  write_file(dir / (base + ".json"), resample_sidecar_json(plan, outcome, entries.size(), kde.mode));
  manifest.output(base + ".csv");
  manifest.output(base + ".json");
  return std::move(outcome.entries);
}

// Rows of one sex, or nullopt (with a warning) when there are too few and
// the sex was not asked for explicitly.
std::optional<std::vector<LifterEntry>> rows_for(std::span<const LifterEntry> all, Sex sex, const Common& c,
                                                 std::size_t minimum, std::ostream& err) {
  auto rows = of_sex(all, sex);
  if (rows.size() >= minimum) return rows;
  if (c.sex != "both") {
    throw InsufficientDataError("only " + std::to_string(rows.size()) + " rows for sex " + sex_suffix(sex) +
                                ", need " + std::to_string(minimum));
  }
  err << "warning: skipping sex " << sex_suffix(sex) << " (" << rows.size() << " rows)\n";
  return std::nullopt;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  Common common;
  std::string family = "both";
  ResampleArgs resample;
  int max_iterations = 200;
  double tolerance = 1e-10;
  bool single_start = false;
};

std::vector<ModelFamily> families_for(const std::string& flag) {
  if (flag == "both") return {ModelFamily::VonBertalanffy, ModelFamily::Logistic};
  return {*parse_family(flag)};
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const IngestResult input = read_entries(a.common);
  const fs::path dir = prepare_output_dir(a.common.output_dir);
  Manifest manifest("fit", args, a.common);
  manifest["filter_policy"] = policy_json(permissive_policy(a.common.sex));
  manifest["resample"] = a.resample.k > 0 ? resample_json(a.resample) : Json(nullptr);
  Json fit_cfg;
  fit_cfg["family"] = a.family;
  fit_cfg["max_iterations"] = a.max_iterations;
  fit_cfg["tolerance"] = a.tolerance;
  fit_cfg["multi_start"] = !a.single_start;
  manifest["fit_config"] = fit_cfg;

  std::vector<FittedRecord> fitted;
  auto run_fits = [&](std::span<const LifterEntry> rows, Sex sex, DatasetVariant dataset) {
    const auto data = observations(rows);
    for (ModelFamily family : families_for(a.family)) {
      FitConfig cfg;
      cfg.family = family;
      cfg.max_iterations = a.max_iterations;
      cfg.tolerance = a.tolerance;
      cfg.multi_start = !a.single_start;
      fitted.push_back({sex, dataset, rows.size(), fit(data, cfg)});
    }
  };

  for (Sex sex : sexes_for(a.common.sex)) {
    const auto rows = rows_for(input.entries, sex, a.common, kMinFitObservations, err);
    if (!rows) continue;
    run_fits(*rows, sex, DatasetVariant::Original);
    if (a.resample.k > 0) {
      const auto resampled = resample_and_export(*rows, a.resample, a.common.seed, sex, dir, manifest);
      run_fits(resampled, sex, DatasetVariant::Resampled);
    }
  }

  std::vector<CoefficientRecord> table;
  for (const auto& f : fitted) table.push_back({f.sex, f.dataset, f.result.params});
  write_file(dir / "coefficients_table.json", coefficient_table_json(table, 4));
  write_file(dir / "coefficients.json", fit_results_json(fitted));
  manifest.output("coefficients_table.json");
  manifest.output("coefficients.json");
  manifest.write(dir);

  bool all_converged = true;
  for (const auto& f : fitted) {
    const auto t = to_table_units(f.result.params);
    out << sex_code(f.sex) << ' ' << family_name(f.result.params.family()) << ' ' << dataset_name(f.dataset)
        << ": L=" << csv::format_fixed(t.L_1e2kg, 3) << "e2 kg k=" << csv::format_fixed(t.k_1e2_per_kg, 3)
        << "e-2 /kg x0=" << csv::format_fixed(t.x0_kg, 2) << " kg rmse=" << csv::format_fixed(f.result.rmse, 2)
        << (f.result.converged ? "" : " [not converged]") << (f.result.degenerate ? " [degenerate]" : "") << '\n';
    all_converged = all_converged && f.result.converged;
  }
  if (!all_converged) throw NonConvergence("at least one fit did not converge");
  return kExitOk;
}

// ---------------------------------------------------------------- scoring shared by score/diagnose

struct ScoreArgs {
  std::string system;
  std::string params;
  std::string family = "logistic";
  std::string dataset;
  std::string config;
  bool skip_out_of_domain = false;
};

void add_score_options(CLI::App* cmd, ScoreArgs& s) {
  cmd->add_option("--system", s.system, "wilks, wilks2, ipf_gl or model")
      ->check(CLI::IsMember({"wilks", "wilks2", "ipf_gl", "model"}));
  cmd->add_option("--params", s.params, "Fitted coefficient JSON (for --system model)");
  cmd->add_option("--family", s.family, "Model family picked from --params")
      ->check(CLI::IsMember({"vb", "vonbertalanffy", "logistic"}));
  cmd->add_option("--dataset", s.dataset, "original or resampled (default: resampled when present)")
      ->check(CLI::IsMember({"original", "resampled"}));
  cmd->add_option("--config", s.config, "Coefficient registry JSON (default: $LIFTCURVE_CONFIG)");
  cmd->add_flag("--skip-out-of-domain", s.skip_out_of_domain, "Drop rows outside the coefficient domain");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

ScoreRegistry model_registry(const ScoreArgs& s) {
  if (s.params.empty()) throw ConfigError("--system model needs --params");
  const auto records = parse_coefficient_records(read_text(s.params));
  const ModelFamily family = *parse_family(s.family);
  ScoreRegistry registry;
  for (Sex sex : {Sex::Female, Sex::Male}) {
    std::optional<CoefficientRecord> chosen;
    for (const auto& r : records) {
      if (r.sex != sex || r.params.family() != family) continue;
      if (!s.dataset.empty()) {
        if (dataset_name(r.dataset) == s.dataset) chosen = r;
      } else if (!chosen || r.dataset == DatasetVariant::Resampled) {
        chosen = r;
      }
    }
    if (chosen) registry.add(ScoreSystem::Model, sex, chosen->params);
  }
  return registry;
}

std::string config_path(const ScoreArgs& s) {
  if (!s.config.empty()) return s.config;
  if (const char* env = std::getenv("LIFTCURVE_CONFIG"); env && *env) return env;
  return LIFTCURVE_DEFAULT_CONFIG;
}

ScoreRegistry load_registry(const ScoreArgs& s) {
  if (*parse_system(s.system) == ScoreSystem::Model) return model_registry(s);
  return ScoreRegistry::from_file(config_path(s));
}

Json score_json(const ScoreArgs& s) {
  Json j;
  j["system"] = s.system;
  if (*parse_system(s.system) == ScoreSystem::Model) {
    j["params"] = s.params;
    j["params_sha256"] = file_sha256(s.params);
    j["family"] = s.family;
    j["dataset"] = s.dataset.empty() ? Json("auto") : Json(s.dataset);
  } else {
    const std::string path = config_path(s);
    j["config"] = path;
    j["config_sha256"] = file_sha256(path);
  }
  j["skip_out_of_domain"] = s.skip_out_of_domain;
  return j;
}

std::vector<ScoredEntry> score_entries(std::span<const LifterEntry> entries, const ScoreArgs& s,
                                       std::size_t& skipped) {
  const ScoreRegistry registry = load_registry(s);
  const ScoreSystem system = *parse_system(s.system);
  skipped = 0;
  if (!s.skip_out_of_domain) return score_dataset(entries, system, registry);
  std::vector<ScoredEntry> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    try {
      out.push_back({e, registry.score(system, e.sex, e.bodyweight_kg, e.total_kg)});
    } catch (const DomainError&) {
      ++skipped;
    }
  }
  return out;
}

// ---------------------------------------------------------------- score

struct ScoreCmdArgs {
  Common common;
  ScoreArgs score;
};

int cmd_score(const ScoreCmdArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (a.score.system.empty()) throw ConfigError("--system is required");
  const IngestResult input = read_entries(a.common);
  std::size_t skipped = 0;
  const auto scored = score_entries(input.entries, a.score, skipped);

  const fs::path dir = prepare_output_dir(a.common.output_dir);
  Manifest manifest("score", args, a.common);
  manifest["filter_policy"] = policy_json(permissive_policy(a.common.sex));
  manifest["score"] = score_json(a.score);
  write_with(dir / "scored.csv", [&](std::ostream& o) { write_scored_csv(o, scored); });
  manifest.output("scored.csv");
  manifest.write(dir);

  out << "scored " << scored.size() << " rows";
  if (skipped > 0) out << " (" << skipped << " outside the coefficient domain skipped)";
  out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  Common common;
  ScoreArgs score;
  bool myriad = false;
  bool quantiles = false;
  bool distribution = false;
  std::size_t group_size = kDefaultMyriadSize;
  std::size_t window = kDefaultQuantileWindow;
  std::vector<double> below;
};

int cmd_diagnose(const DiagnoseArgs& a, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const bool none_selected = !a.myriad && !a.quantiles && !a.distribution && a.below.empty();
  const bool want_myriad = a.myriad || none_selected;
  const bool want_quantiles = a.quantiles || none_selected;
  const bool want_distribution = a.distribution || none_selected;

  // Scores come from a "Score" column when present, otherwise from --system.
  const auto header = read_header(a.common.input);
  const bool has_scores = std::find(header.begin(), header.end(), "Score") != header.end();
  ParseOptions options;
  if (has_scores) options.extra_columns = {"Score"};
  const IngestResult input = read_entries(a.common, options);

  std::vector<ScoredEntry> scored;
  bool scores_available = true;
  std::size_t skipped = 0;
  if (has_scores) {
    for (std::size_t i = 0; i < input.entries.size(); ++i) {
      const auto v = csv::parse_number(input.extras[i][0]);
      if (!v) throw SchemaError("row " + std::to_string(i + 1) + ": Score is not a number");
      scored.push_back({input.entries[i], *v});
    }
  } else if (!a.score.system.empty()) {
    scored = score_entries(input.entries, a.score, skipped);
  } else {
    scores_available = false;
    if (want_quantiles || want_distribution) {
      err << "warning: input has no Score column and no --system given; score diagnostics skipped\n";
    }
  }

  const fs::path dir = prepare_output_dir(a.common.output_dir);
  Manifest manifest("diagnose", args, a.common);
  manifest["filter_policy"] = policy_json(permissive_policy(a.common.sex));
  manifest["score"] = has_scores ? Json("input Score column")
                                 : (a.score.system.empty() ? Json(nullptr) : score_json(a.score));
  Json diag_cfg;
  diag_cfg["myriad_group_size"] = want_myriad ? Json(a.group_size) : Json(nullptr);
  diag_cfg["quantile_window"] = want_quantiles ? Json(a.window) : Json(nullptr);
  diag_cfg["quantile_levels"] = default_quantile_levels();
  diag_cfg["distribution"] = want_distribution;
  diag_cfg["below_kg"] = a.below;
  manifest["diagnostics"] = diag_cfg;

  Json summary;
  summary["sexes"] = Json::object();
  for (Sex sex : sexes_for(a.common.sex)) {
    const std::string tag = sex_suffix(sex);
    const auto rows = of_sex(input.entries, sex);
    std::vector<ScoredEntry> sex_scored;
    for (const auto& s : scored) {
      if (s.entry.sex == sex) sex_scored.push_back(s);
    }
    Json section;
    section["n"] = rows.size();
    if (rows.empty()) {
      err << "warning: no rows for sex " << tag << "; diagnostics skipped\n";
      summary["sexes"][tag] = section;
      continue;
    }

    if (want_myriad) {
      const auto bins = myriad_averages(rows, a.group_size);
      write_with(dir / ("myriad_" + tag + ".csv"), [&](std::ostream& o) { write_myriad_csv(o, bins); });
      manifest.output("myriad_" + tag + ".csv");
      section["myriad_bins"] = bins.bins.size();
    }
    if (want_quantiles && scores_available) {
      if (sex_scored.size() < a.window) {
        err << "warning: sex " << tag << " has " << sex_scored.size() << " scored rows, fewer than window "
            << a.window << "; rolling quantiles skipped\n";
      } else {
        const auto q = rolling_quantiles(sex_scored, a.window);
        write_with(dir / ("quantiles_" + tag + ".csv"), [&](std::ostream& o) { write_quantiles_csv(o, q); });
        manifest.output("quantiles_" + tag + ".csv");
        section["quantile_rows"] = q.rows.size();
      }
    }
    if (want_distribution && scores_available) {
      try {
        const auto dist = score_distribution(scores_of(sex_scored));
        write_with(dir / ("distribution_" + tag + ".csv"),
                   [&](std::ostream& o) { write_distribution_csv(o, dist); });
        manifest.output("distribution_" + tag + ".csv");
        section["mean"] = dist.mean;
        section["std"] = dist.std;
        section["skewness"] = dist.skewness;
        section["excess_kurtosis"] = dist.excess_kurtosis;
        section["gaussian_fit"] = {{"mean", dist.gaussian_fit.mean}, {"std", dist.gaussian_fit.std}};
      } catch (const InsufficientDataError& e) {
        err << "warning: sex " << tag << ": score distribution skipped: " << e.what() << '\n';
      } catch (const DegenerateError& e) {
        err << "warning: sex " << tag << ": score distribution skipped: " << e.what() << '\n';
      }
    }
    if (!a.below.empty()) {
      Json fractions = Json::object();
      for (double threshold : a.below) fractions[csv::format_shortest(threshold)] = fraction_below(rows, threshold);
      section["fraction_below"] = fractions;
    }
    summary["sexes"][tag] = section;
  }
  if (skipped > 0) summary["skipped_out_of_domain"] = skipped;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  manifest.output("summary.json");
  manifest.write(dir);

  out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- resample

struct ResampleCmdArgs {
  Common common;
  ResampleArgs resample;
};

int cmd_resample(const ResampleCmdArgs& a, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const IngestResult input = read_entries(a.common);
  const fs::path dir = prepare_output_dir(a.common.output_dir);
  Manifest manifest("resample", args, a.common);
  manifest["filter_policy"] = policy_json(permissive_policy(a.common.sex));
  manifest["resample"] = resample_json(a.resample);
  for (Sex sex : sexes_for(a.common.sex)) {
    const auto rows = rows_for(input.entries, sex, a.common, 2, err);
    if (!rows) continue;
    const auto drawn = resample_and_export(*rows, a.resample, a.common.seed, sex, dir, manifest);
    out << sex_suffix(sex) << ": resampled " << drawn.size() << " from " << rows->size() << " rows\n";
  }
  manifest.write(dir);
  return kExitOk;
}

// ---------------------------------------------------------------- kde

struct KdeCmdArgs {
  Common common;
  ResampleArgs resample;
  double grid_min = 20.0;
  double grid_max = 250.0;
  double grid_step = 0.1;
};

int cmd_kde(const KdeCmdArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const IngestResult input = read_entries(a.common);
  const fs::path dir = prepare_output_dir(a.common.output_dir);
  Manifest manifest("kde", args, a.common);
  manifest["filter_policy"] = policy_json(permissive_policy(a.common.sex));
  manifest["bandwidth"] = a.resample.bandwidth;
  manifest["kde_max_points"] = a.resample.kde_max_points;
  manifest["grid"] = {a.grid_min, a.grid_max, a.grid_step};
  const auto grid = linear_grid(a.grid_min, a.grid_max, a.grid_step);
  for (Sex sex : sexes_for(a.common.sex)) {
    const auto rows = rows_for(input.entries, sex, a.common, 2, err);
    if (!rows) continue;
    const auto model = KdeModel::fit(bodyweights(*rows), make_kde_options(a.resample, a.common.seed, sex));
    const std::string name = "density_" + sex_suffix(sex) + ".csv";
    write_with(dir / name, [&](std::ostream& o) { write_density_csv(o, model, grid); });
    manifest.output(name);
    out << sex_suffix(sex) << ": bandwidth " << csv::format_fixed(model.bandwidth(), 4) << " kg over "
        << model.size() << " points\n";
  }
  manifest.write(dir);
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  Json manifest;
  try {
    manifest = Json::parse(read_text(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest does not parse: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
    throw ConfigError("manifest has no argv array");
  }
  std::vector<std::string> args{"liftcurve"};
  for (const auto& v : manifest["argv"]) args.push_back(v.get<std::string>());
  return dispatch(args, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bodyweight-adjusted strength models: ingest, resample, fit, score and diagnose."};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Filter an OpenPowerlifting CSV to the analysis population");
  add_common(ingest_cmd, ingest.common);
  ingest_cmd->add_option("--min-bw", ingest.min_bw, "Minimum bodyweight in kg");
  ingest_cmd->add_option("--max-bw", ingest.max_bw, "Maximum bodyweight in kg");
  ingest_cmd->add_flag("--keep-equipped", ingest.keep_equipped, "Do not require Equipment=Raw");
  ingest_cmd->add_flag("--any-division", ingest.any_division, "Do not require an open division");
  ingest_cmd->add_flag("--any-event", ingest.any_event, "Do not require Event=SBD");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit growth models per sex, optionally on a resampled dataset");
  add_common(fit_cmd, fit_args.common);
  fit_cmd->add_option("--family", fit_args.family, "vb, logistic or both")
      ->check(CLI::IsMember({"vb", "vonbertalanffy", "logistic", "both"}));
  fit_cmd->add_option("--resample", fit_args.resample.k, "Also fit on K inverse-density resampled rows");
  add_resample_options(fit_cmd, fit_args.resample);
  fit_cmd->add_option("--max-iterations", fit_args.max_iterations, "Levenberg-Marquardt iteration cap");
  fit_cmd->add_option("--tolerance", fit_args.tolerance, "Relative SSE change for convergence");
  fit_cmd->add_flag("--single-start", fit_args.single_start, "Disable the three-point multi-start");

  ScoreCmdArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Append a bodyweight-adjusted score column");
  add_common(score_cmd, score_args.common);
  add_score_options(score_cmd, score_args.score);

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Myriad averages, rolling quantiles, score distribution");
  add_common(diag_cmd, diag.common);
  add_score_options(diag_cmd, diag.score);
  diag_cmd->add_flag("--myriad", diag.myriad, "Bodyweight myriad averages");
  diag_cmd->add_option("--group-size", diag.group_size, "Results per myriad bin")->check(CLI::PositiveNumber);
  diag_cmd->add_flag("--quantiles", diag.quantiles, "Rolling score quantiles");
  diag_cmd->add_option("--window", diag.window, "Rolling quantile window")->check(CLI::Range(2, 100000000));
  diag_cmd->add_flag("--distribution", diag.distribution, "Score distribution and Gaussian fit");
  diag_cmd->add_option("--below", diag.below, "Report the fraction of rows below this bodyweight (repeatable)");

  ResampleCmdArgs resample_args;
  resample_args.resample.k = kDefaultResampleSize;
  auto* resample_cmd = app.add_subcommand("resample", "Export an inverse-density resampled dataset");
  add_common(resample_cmd, resample_args.common);
  resample_cmd->add_option("--resample", resample_args.resample.k, "Number of rows to draw")
      ->check(CLI::PositiveNumber);
  add_resample_options(resample_cmd, resample_args.resample);

  KdeCmdArgs kde_args;
  auto* kde_cmd = app.add_subcommand("kde", "Export the bodyweight density estimate on a grid");
  add_common(kde_cmd, kde_args.common);
  add_resample_options(kde_cmd, kde_args.resample);
  kde_cmd->add_option("--grid-min", kde_args.grid_min, "Grid start in kg");
  kde_cmd->add_option("--grid-max", kde_args.grid_max, "Grid end in kg");
  kde_cmd->add_option("--grid-step", kde_args.grid_step, "Grid step in kg")->check(CLI::PositiveNumber);

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", replay_path, "Path to a *.manifest.json")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (ingest_cmd->parsed()) return cmd_ingest(ingest, args, out);
  if (fit_cmd->parsed()) return cmd_fit(fit_args, args, out, err);
  if (score_cmd->parsed()) return cmd_score(score_args, args, out);
  if (diag_cmd->parsed()) return cmd_diagnose(diag, args, out, err);
  if (resample_cmd->parsed()) return cmd_resample(resample_args, args, out, err);
  if (kde_cmd->parsed()) return cmd_kde(kde_args, args, out, err);
  return cmd_replay(replay_path, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace liftcurve::cli
