#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liftcurve/types.hpp"

namespace liftcurve {

enum class Equipment { Raw, Wraps, SinglePly, MultiPly, Unlimited, Straps, Other };

// Upstream spelling ("Raw", "Single-ply", ...). Other -> "Other".
std::string_view equipment_name(Equipment equipment);
Equipment parse_equipment(std::string_view text);

// One competition result. Bodyweight is the covariate x, total the response y.
struct LifterEntry {
  Sex sex = Sex::Male;
  double bodyweight_kg = 0.0;
  double best_squat_kg = 0.0;
  double best_bench_kg = 0.0;
  double best_deadlift_kg = 0.0;
  double total_kg = 0.0;
  Equipment equipment = Equipment::Raw;
  std::string division;
  std::string event;

  friend bool operator==(const LifterEntry&, const LifterEntry&) = default;
};

// Maximum |total - (squat + bench + deadlift)| accepted, in kg.
inline constexpr double kTotalSlackKg = 0.5;

// True if the entry satisfies every LifterEntry invariant.
bool is_valid(const LifterEntry& entry);

struct FilterPolicy {
  bool require_raw = true;
  bool require_open_division = true;
  // Event must be "SBD" (all three movements contested).
  bool require_full_event = true;
  std::optional<Sex> sex;
  // Inclusive [min, max] bodyweight window in kg.
  std::optional<std::pair<double, double>> bodyweight_range;

  // Throws ConfigError when the range is empty or inverted.
  void validate() const;
};

// Reasons are checked in declaration order; a row is counted under the first
// one that applies.
enum class DropReason {
  MalformedRow,
  Sex,
  Equipment,
  Division,
  Event,
  MalformedNumber,
  MissingBodyweight,
  MissingLift,
  MissingTotal,
  InconsistentTotal,
  BodyweightRange,
};
inline constexpr std::size_t kDropReasonCount = 11;

std::string_view drop_reason_name(DropReason reason);

struct IngestStats {
  std::size_t total_rows = 0;
  std::size_t kept = 0;
  std::array<std::size_t, kDropReasonCount> dropped{};

  std::size_t dropped_for(DropReason reason) const {
    return dropped[static_cast<std::size_t>(reason)];
  }
  std::size_t dropped_total() const;
  std::string to_json() const;
};

struct IngestResult {
  std::vector<LifterEntry> entries;
  IngestStats stats;
  // Raw text of ParseOptions::extra_columns for each kept entry, in the
  // order the columns were requested.
  std::vector<std::vector<std::string>> extras;
};

struct ParseOptions {
  // Additional columns whose text should be carried through for kept rows.
  // Each must be present in the header.
  std::vector<std::string> extra_columns;
};

// Required upstream column names.
inline constexpr std::array<std::string_view, 9> kRequiredColumns = {
    "Sex",          "Equipment",    "Division",        "Event",   "BodyweightKg",
    "Best3SquatKg", "Best3BenchKg", "Best3DeadliftKg", "TotalKg",
};

// Parses an OpenPowerlifting-format CSV and applies the filter policy.
// Throws IoError if the file cannot be read and SchemaError (naming the
// column) if a required column is missing. Malformed rows are counted,
// never fatal.
IngestResult parse_csv(const std::filesystem::path& path, const FilterPolicy& policy,
                       const ParseOptions& options = {});
IngestResult parse_csv(std::istream& in, const FilterPolicy& policy,
                       const ParseOptions& options = {});

// Header of a CSV file (empty if the file is empty).
std::vector<std::string> read_header(const std::filesystem::path& path);

// Normalized CSV: upstream column names, exactly the LifterEntry fields,
// kg values with two decimals. Readable again by parse_csv.
void write_normalized_csv(std::ostream& out, std::span<const LifterEntry> entries);
void write_normalized_csv(const std::filesystem::path& path, std::span<const LifterEntry> entries);

// Fields of one normalized row, in header order.
std::vector<std::string> normalized_fields(const LifterEntry& entry);

// Bodyweights of a set of entries, in order.
std::vector<double> bodyweights(std::span<const LifterEntry> entries);

}  // namespace liftcurve
