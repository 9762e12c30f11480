#include "liftcurve/scoring.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "liftcurve/csv.hpp"
#include "liftcurve/error.hpp"

namespace liftcurve {

namespace {

// Grid step used to check denominators for positivity.
constexpr double kValidationStepKg = 0.01;

void check_domain(const ScoringDomain& d) {
  if (!(d.lo < d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi)) {
    throw ConfigError("scoring domain must satisfy lo < hi");
  }
}

void require_in_domain(double x, double y, const ScoringDomain& d) {
  if (!std::isfinite(x) || !d.contains(x)) {
    throw DomainError("bodyweight " + csv::format_shortest(x) + " kg is outside the scoring domain [" +
                      csv::format_shortest(d.lo) + ", " + csv::format_shortest(d.hi) + "]");
  }
  if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("total must be positive");
}

std::string pair_name(ScoreSystem system, Sex sex) {
  return "(" + std::string(system_name(system)) + ", " + std::string(sex_code(sex)) + ")";
}

ScoringDomain read_domain(const nlohmann::json& j) {
  ScoringDomain d;
  if (j.contains("domain_kg")) {
    const auto& v = j["domain_kg"];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError("domain_kg must be a [lo, hi] pair");
    }
    d = {v[0].get<double>(), v[1].get<double>()};
  }
  return d;
}

double read_number(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(where + ": missing numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

double WilksCoefficients::denominator(double x) const {
  double acc = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void WilksCoefficients::validate() const {
  check_domain(domain);
  if (!(C > 0.0)) throw ConfigError("Wilks constant C must be positive");
  for (double c : poly) {
    if (!std::isfinite(c)) throw ConfigError("Wilks coefficients must be finite");
  }
  const auto steps = static_cast<std::size_t>(std::ceil((domain.hi - domain.lo) / kValidationStepKg));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double x = std::min(domain.lo + static_cast<double>(i) * kValidationStepKg, domain.hi);
    if (!(denominator(x) > 0.0)) {
      throw ConfigError("Wilks polynomial is not positive at " + csv::format_fixed(x, 2) +
                        " kg; narrow domain_kg");
    }
  }
}

double GlCoefficients::denominator(double x) const { return A - B * std::exp(-C * x); }

void GlCoefficients::validate() const {
  check_domain(domain);
  if (!(A > 0.0) || !(B >= 0.0) || !(C > 0.0) || !std::isfinite(A) || !std::isfinite(B) || !std::isfinite(C)) {
    throw ConfigError("IPF GL coefficients need A > 0, B >= 0, C > 0");
  }
  // The denominator increases with x, so its minimum is at the lower edge.
  if (!(denominator(domain.lo) > 0.0)) {
    throw ConfigError("IPF GL denominator is not positive at " + csv::format_fixed(domain.lo, 2) + " kg");
  }
}

double wilks_score(double x, double y, const WilksCoefficients& coeffs) {
  require_in_domain(x, y, coeffs.domain);
  const double denom = coeffs.denominator(x);
  if (!(denom > 0.0)) throw ConfigError("Wilks denominator is not positive");
  return coeffs.C * y / denom;
}

double gl_score(double x, double y, const GlCoefficients& coeffs) {
  require_in_domain(x, y, coeffs.domain);
  const double denom = coeffs.denominator(x);
  if (!(denom > 0.0)) throw ConfigError("IPF GL denominator is not positive");
  return 100.0 * y / denom;
}

double model_score(double x, double y, const GrowthParams& params, double scale) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("model score needs a positive bodyweight");
  if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("total must be positive");
  if (!(scale > 0.0)) throw DomainError("score scale must be positive");
  const double expected = eval(params, x);
  if (!(expected > 0.0)) {
    throw DomainError("bodyweight " + csv::format_shortest(x) + " kg is at or below the model's zero");
  }
  return scale * y / expected;
}

std::string_view system_name(ScoreSystem system) {
  switch (system) {
    case ScoreSystem::Wilks: return "wilks";
    case ScoreSystem::Wilks2: return "wilks2";
    case ScoreSystem::IpfGl: return "ipf_gl";
    case ScoreSystem::Model: break;
  }
  return "model";
}

std::optional<ScoreSystem> parse_system(std::string_view name) {
  for (auto s : {ScoreSystem::Wilks, ScoreSystem::Wilks2, ScoreSystem::IpfGl, ScoreSystem::Model}) {
    if (name == system_name(s)) return s;
  }
  return std::nullopt;
}

void ScoreRegistry::add(ScoreSystem system, Sex sex, Coefficients coefficients) {
  const bool matches = std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, WilksCoefficients>) {
          c.validate();
          return system == ScoreSystem::Wilks || system == ScoreSystem::Wilks2;
        } else if constexpr (std::is_same_v<T, GlCoefficients>) {
          c.validate();
          return system == ScoreSystem::IpfGl;
        } else {
          return system == ScoreSystem::Model;
        }
      },
      coefficients);
  if (!matches) throw ConfigError("coefficient kind does not match system " + pair_name(system, sex));
  entries_.insert_or_assign({system, sex}, std::move(coefficients));
}

bool ScoreRegistry::contains(ScoreSystem system, Sex sex) const {
  return entries_.find({system, sex}) != entries_.end();
}

const ScoreRegistry::Coefficients& ScoreRegistry::at(ScoreSystem system, Sex sex) const {
  const auto it = entries_.find({system, sex});
  if (it == entries_.end()) throw ConfigError("no coefficients for " + pair_name(system, sex));
  return it->second;
}

double ScoreRegistry::score(ScoreSystem system, Sex sex, double x, double y) const {
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, WilksCoefficients>) {
          return wilks_score(x, y, c);
        } else if constexpr (std::is_same_v<T, GlCoefficients>) {
          return gl_score(x, y, c);
        } else {
          return model_score(x, y, c);
        }
      },
      at(system, sex));
}

ScoreRegistry ScoreRegistry::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("coefficient config does not parse: ") + e.what());
  }
  const nlohmann::json* records = &doc;
  if (doc.is_object()) {
    if (!doc.contains("records")) throw ConfigError("coefficient config object needs a 'records' array");
    records = &doc["records"];
  }
  if (!records->is_array()) throw ConfigError("coefficient config records must be an array");

  ScoreRegistry registry;
  for (const auto& r : *records) {
    if (!r.is_object() || !r.contains("system") || !r["system"].is_string() || !r.contains("sex") ||
        !r["sex"].is_string()) {
      throw ConfigError("every coefficient record needs string fields 'system' and 'sex'");
    }
    const auto system_text = r["system"].get<std::string>();
    const auto system = parse_system(system_text);
    if (!system) throw ConfigError("unknown scoring system '" + system_text + "'");
    const auto sex = parse_sex(r["sex"].get<std::string>());
    if (!sex) throw ConfigError("unknown sex in " + system_text + " record (expected F or M)");
    const std::string where = pair_name(*system, *sex);

    switch (*system) {
      case ScoreSystem::Wilks:
      case ScoreSystem::Wilks2: {
        WilksCoefficients w;
        const char* names[] = {"a", "b", "c", "d", "e", "f"};
        for (std::size_t i = 0; i < 6; ++i) w.poly[i] = read_number(r, names[i], where);
        w.C = r.contains("C") ? read_number(r, "C", where) : (*system == ScoreSystem::Wilks ? 500.0 : 600.0);
        w.domain = read_domain(r);
        registry.add(*system, *sex, w);
        break;
      }
      case ScoreSystem::IpfGl: {
        GlCoefficients g{read_number(r, "A", where), read_number(r, "B", where), read_number(r, "C", where),
                         read_domain(r)};
        registry.add(*system, *sex, g);
        break;
      }
      case ScoreSystem::Model: {
        const auto parsed = parse_coefficient_records(r.dump());
        registry.add(*system, *sex, parsed.front().params);
        break;
      }
    }
  }
  return registry;
}

ScoreRegistry ScoreRegistry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open coefficient config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

std::vector<ScoredEntry> score_dataset(std::span<const LifterEntry> entries, ScoreSystem system,
                                       const ScoreRegistry& registry) {
  std::vector<ScoredEntry> out;
  out.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    try {
      out.push_back({e, registry.score(system, e.sex, e.bodyweight_kg, e.total_kg)});
    } catch (const DomainError& err) {
      throw DomainError("entry " + std::to_string(i) + ": " + err.what());
    }
  }
  return out;
}

void write_scored_csv(std::ostream& out, std::span<const ScoredEntry> scored) {
  std::vector<std::string> header(kRequiredColumns.begin(), kRequiredColumns.end());
  header.emplace_back("Score");
  csv::write_row(out, header);
  for (const auto& s : scored) {
    auto fields = normalized_fields(s.entry);
    fields.push_back(csv::format_fixed(s.score, 3));
    csv::write_row(out, fields);
  }
}

}  // namespace liftcurve
