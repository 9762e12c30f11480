#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "liftcurve/ingest.hpp"
#include "liftcurve/models.hpp"
#include "liftcurve/types.hpp"

namespace liftcurve {

// Bodyweight interval (kg) on which a coefficient set is declared valid.
struct ScoringDomain {
  double lo = 30.0;
  double hi = 250.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Wilks: C * y / (a + b x + c x^2 + d x^3 + e x^4 + f x^5).
struct WilksCoefficients {
  std::array<double, 6> poly{};  // a..f
  double C = 500.0;
  ScoringDomain domain;

  double denominator(double x) const;
  // Throws ConfigError unless C > 0 and the polynomial is positive on the
  // whole domain.
  void validate() const;
};

// IPF GL: 100 * y / (A - B exp(-C x)).
struct GlCoefficients {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  ScoringDomain domain;

  double denominator(double x) const;
  // Throws ConfigError unless A, B >= 0, C > 0 and the denominator is
  // positive on the domain.
  void validate() const;
};

inline constexpr double kModelScoreScale = 100.0;

// Throw DomainError when x is outside the coefficient domain or y <= 0.
double wilks_score(double x, double y, const WilksCoefficients& coeffs);
double gl_score(double x, double y, const GlCoefficients& coeffs);

// scale * y / f(x). Throws DomainError when x <= 0, y <= 0 or f(x) <= 0.
double model_score(double x, double y, const GrowthParams& params, double scale = kModelScoreScale);

enum class ScoreSystem { Wilks, Wilks2, IpfGl, Model };

std::string_view system_name(ScoreSystem system);  // "wilks", "wilks2", "ipf_gl", "model"
std::optional<ScoreSystem> parse_system(std::string_view name);

// Coefficient sets keyed by (system, sex). Immutable after loading.
class ScoreRegistry {
 public:
  using Coefficients = std::variant<WilksCoefficients, GlCoefficients, GrowthParams>;

  // Loads {"version": N, "records": [...]} or a bare array of records, each
  // {"system": ..., "sex": "F"|"M", ...coefficients...}. Throws ConfigError.
  static ScoreRegistry from_json(std::string_view json_text);
  static ScoreRegistry from_file(const std::filesystem::path& path);

  // Validates the coefficients for the system; replaces an existing entry.
  void add(ScoreSystem system, Sex sex, Coefficients coefficients);

  bool contains(ScoreSystem system, Sex sex) const;
  // Throws ConfigError naming the pair when absent.
  const Coefficients& at(ScoreSystem system, Sex sex) const;

  double score(ScoreSystem system, Sex sex, double x, double y) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<ScoreSystem, Sex>, Coefficients> entries_;
};

struct ScoredEntry {
  LifterEntry entry;
  double score = 0.0;
};

// Scores every entry with the coefficient set of its sex, preserving order.
// Throws ConfigError if a (system, sex) pair is unresolved, DomainError if
// an entry lies outside a coefficient domain.
std::vector<ScoredEntry> score_dataset(std::span<const LifterEntry> entries, ScoreSystem system,
                                       const ScoreRegistry& registry);

// Normalized entry columns plus "Score" with three decimals.
void write_scored_csv(std::ostream& out, std::span<const ScoredEntry> scored);

}  // namespace liftcurve
