#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liftcurve/types.hpp"

namespace liftcurve {

// Parameters (L, k, x0) of a bodyweight -> expected-total growth curve.
//
//   VonBertalanffy:  f(x) = L * (1 - exp(-k (x - x0)))
//   Logistic:        f(x) = L * (s(k (x - x0)) - s(-k x0)),  s(z) = 1 / (1 + e^-z)
//
// The logistic is shifted so that f(0) = 0 exactly. L is in kg, k in 1/kg,
// x0 in kg. Construction validates L > 0, k > 0 and finiteness; instances
// are immutable.
class GrowthParams {
 public:
  GrowthParams(ModelFamily family, double L, double k, double x0);

  ModelFamily family() const { return family_; }
  double L() const { return L_; }
  double k() const { return k_; }
  double x0() const { return x0_; }

  std::array<double, 3> as_array() const { return {L_, k_, x0_}; }
  GrowthParams with_values(double L, double k, double x0) const {
    return GrowthParams(family_, L, k, x0);
  }

  friend bool operator==(const GrowthParams&, const GrowthParams&) = default;

 private:
  ModelFamily family_;
  double L_;
  double k_;
  double x0_;
};

// Expected total f(x). Throws DomainError for non-finite x.
double eval(const GrowthParams& params, double x);

// df/dx, exact for both families (including the logistic offset term).
double first_derivative(const GrowthParams& params, double x);

// d2f/dx2.
double second_derivative(const GrowthParams& params, double x);

// Partial derivatives (df/dL, df/dk, df/dx0) at x; the fitting Jacobian row.
std::array<double, 3> parameter_gradient(const GrowthParams& params, double x);

// x0 for the logistic family; none for Von Bertalanffy, whose second
// derivative never changes sign.
std::optional<double> inflection_point(const GrowthParams& params);

// Supremum of f over x: L for Von Bertalanffy, L * (1 - s(-k x0)) for the
// shifted logistic.
double asymptote(const GrowthParams& params);

// Von Bertalanffy curve with the same asymptote and the same exponential
// tail as the given logistic, i.e. the large-x approximation of it.
GrowthParams matching_von_bertalanffy(const GrowthParams& logistic);

// Coefficients in the published table units: L in 10^2 kg, k in 10^-2 1/kg.
struct TableCoefficients {
  double L_1e2kg = 0.0;
  double k_1e2_per_kg = 0.0;
  double x0_kg = 0.0;
};

TableCoefficients to_table_units(const GrowthParams& params);
GrowthParams from_table_units(ModelFamily family, const TableCoefficients& table);

// One row of a fitted-coefficient table.
struct CoefficientRecord {
  Sex sex = Sex::Male;
  DatasetVariant dataset = DatasetVariant::Original;
  GrowthParams params{ModelFamily::VonBertalanffy, 1.0, 1.0, 0.0};
};

// Rounds to the given number of significant digits.
double round_significant(double value, int digits);

// JSON array of {family, sex, dataset, L_1e2kg, k_1e-2perkg, x0_kg}.
// significant_digits <= 0 keeps full precision.
std::string coefficient_table_json(std::span<const CoefficientRecord> records,
                                   int significant_digits = 4);

// Accepts a JSON array of table records, a single record, or an object with a
// "records" array. Records may alternatively carry internal-unit keys
// {L, k, x0}. Throws ConfigError on malformed input.
std::vector<CoefficientRecord> parse_coefficient_records(std::string_view json_text);

}  // namespace liftcurve
