#include "liftcurve/models.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "json.hpp"
#include "liftcurve/error.hpp"

namespace liftcurve {

namespace {

// Logistic sigmoid without overflow for large |z|.
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("growth model evaluated at non-finite bodyweight");
}

}  // namespace

GrowthParams::GrowthParams(ModelFamily family, double L, double k, double x0)
    : family_(family), L_(L), k_(k), x0_(x0) {
  if (!std::isfinite(L) || !std::isfinite(k) || !std::isfinite(x0)) {
    throw DomainError("growth parameters must be finite");
  }
  if (!(L > 0.0)) throw DomainError("growth parameter L must be positive");
  if (!(k > 0.0)) throw DomainError("growth parameter k must be positive");
}

double eval(const GrowthParams& p, double x) {
  require_finite(x);
  const double z = p.k() * (x - p.x0());
  if (p.family() == ModelFamily::VonBertalanffy) return -p.L() * std::expm1(-z);
  return p.L() * (sigmoid(z) - sigmoid(-p.k() * p.x0()));
}

double first_derivative(const GrowthParams& p, double x) {
  require_finite(x);
  const double z = p.k() * (x - p.x0());
  if (p.family() == ModelFamily::VonBertalanffy) return p.L() * p.k() * std::exp(-z);
  return p.L() * p.k() * sigmoid(z) * sigmoid(-z);
}

double second_derivative(const GrowthParams& p, double x) {
  require_finite(x);
  const double z = p.k() * (x - p.x0());
  const double k2 = p.k() * p.k();
  if (p.family() == ModelFamily::VonBertalanffy) return -p.L() * k2 * std::exp(-z);
  const double s = sigmoid(z);
  const double sc = sigmoid(-z);
  // 1 - 2s written as (1 - s) - s so it is exactly zero at z = 0.
  return p.L() * k2 * s * sc * (sc - s);
}

std::array<double, 3> parameter_gradient(const GrowthParams& p, double x) {
  require_finite(x);
  const double dx = x - p.x0();
  if (p.family() == ModelFamily::VonBertalanffy) {
    const double decay = std::exp(-p.k() * dx);
    return {-std::expm1(-p.k() * dx), p.L() * dx * decay, -p.L() * p.k() * decay};
  }
  const double s = sigmoid(p.k() * dx);
  const double ds = s * sigmoid(-p.k() * dx);
  const double s0 = sigmoid(-p.k() * p.x0());
  const double ds0 = s0 * sigmoid(p.k() * p.x0());
  return {
      s - s0,
      p.L() * (dx * ds + p.x0() * ds0),
      p.L() * p.k() * (ds0 - ds),
  };
}

std::optional<double> inflection_point(const GrowthParams& p) {
  if (p.family() == ModelFamily::Logistic) return p.x0();
  return std::nullopt;
}

double asymptote(const GrowthParams& p) {
  if (p.family() == ModelFamily::VonBertalanffy) return p.L();
  return p.L() * sigmoid(p.k() * p.x0());
}

GrowthParams matching_von_bertalanffy(const GrowthParams& logistic) {
  const double top = asymptote(logistic);
  // Logistic tail: top - L e^{-k(x - x0)}; VB tail: top - top e^{-k(x - x0')}.
  const double x0 = logistic.x0() + std::log(logistic.L() / top) / logistic.k();
  return GrowthParams(ModelFamily::VonBertalanffy, top, logistic.k(), x0);
}

TableCoefficients to_table_units(const GrowthParams& p) {
  return {p.L() / 100.0, p.k() * 100.0, p.x0()};
}

GrowthParams from_table_units(ModelFamily family, const TableCoefficients& t) {
  return GrowthParams(family, t.L_1e2kg * 100.0, t.k_1e2_per_kg / 100.0, t.x0_kg);
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value) || digits <= 0) return value;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, digits - 1);
  double out = value;
  std::from_chars(buf, ptr, out);
  return out;
}

std::string coefficient_table_json(std::span<const CoefficientRecord> records, int significant_digits) {
  auto round = [&](double v) { return round_significant(v, significant_digits); };
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    const TableCoefficients t = to_table_units(r.params);
    nlohmann::ordered_json row;
    row["family"] = family_name(r.params.family());
    row["sex"] = sex_code(r.sex);
    row["dataset"] = dataset_name(r.dataset);
    row["L_1e2kg"] = round(t.L_1e2kg);
    row["k_1e-2perkg"] = round(t.k_1e2_per_kg);
    row["x0_kg"] = round(t.x0_kg);
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

namespace {

CoefficientRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("coefficient record must be a JSON object");
  auto text = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw ConfigError(std::string("coefficient record missing string field '") + key + "'");
    }
    return j[key].get<std::string>();
  };
  auto number = [&](const char* key) -> double {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ConfigError(std::string("coefficient record field '") + key + "' must be a number");
    }
    return j[key].get<double>();
  };

  const auto family = parse_family(text("family"));
  if (!family) throw ConfigError("unknown model family '" + text("family") + "'");
  const auto sex = parse_sex(text("sex"));
  if (!sex) throw ConfigError("unknown sex '" + text("sex") + "' (expected F or M)");
  DatasetVariant dataset = DatasetVariant::Original;
  if (j.contains("dataset")) {
    const auto parsed = parse_dataset(text("dataset"));
    if (!parsed) throw ConfigError("unknown dataset '" + text("dataset") + "'");
    dataset = *parsed;
  }

  try {
    if (j.contains("L")) {
      return {*sex, dataset, GrowthParams(*family, number("L"), number("k"), number("x0"))};
    }
    if (j.contains("L_1e2kg")) {
      const TableCoefficients t{number("L_1e2kg"), number("k_1e-2perkg"), number("x0_kg")};
      return {*sex, dataset, from_table_units(*family, t)};
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid coefficients: ") + e.what());
  }
  throw ConfigError("coefficient record has neither table-unit nor internal-unit coefficients");
}

}  // namespace

std::vector<CoefficientRecord> parse_coefficient_records(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("coefficient JSON does not parse: ") + e.what());
  }
  std::vector<CoefficientRecord> out;
  const nlohmann::json* rows = &doc;
  if (doc.is_object() && doc.contains("records")) rows = &doc["records"];
  if (rows->is_array()) {
    for (const auto& r : *rows) {
      // Mixed scoring configs also carry Wilks/GL records; only model ones apply here.
      if (r.is_object() && r.contains("system") && r["system"] != "model") continue;
      out.push_back(record_from_json(r));
    }
  } else {
    out.push_back(record_from_json(*rows));
  }
  return out;
}

}  // namespace liftcurve
