#include "liftcurve/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <variant>

#include "json.hpp"
#include "liftcurve/csv.hpp"
#include "liftcurve/error.hpp"

namespace liftcurve {

namespace {

constexpr std::array<std::string_view, kDropReasonCount> kDropReasonNames = {
    "malformed_row",      "sex",          "equipment",     "division",
    "event",              "malformed_number", "missing_bodyweight", "missing_lift",
    "missing_total",      "inconsistent_total", "bodyweight_range",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

bool icontains(std::string_view haystack, std::string_view needle) {
  if (needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (iequals(haystack.substr(i, needle.size()), needle)) return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Column positions of the required fields, in kRequiredColumns order.
struct ColumnMap {
  std::array<std::size_t, kRequiredColumns.size()> required{};
  std::vector<std::size_t> extras;
  std::size_t width = 0;
};

ColumnMap map_columns(const std::vector<std::string>& header, const ParseOptions& options) {
  ColumnMap map;
  map.width = header.size();
  auto find = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw SchemaError("missing required column '" + std::string(name) + "'");
  };
  for (std::size_t c = 0; c < kRequiredColumns.size(); ++c) map.required[c] = find(kRequiredColumns[c]);
  for (const auto& name : options.extra_columns) map.extras.push_back(find(name));
  return map;
}

enum Column : std::size_t {
  kSex,
  kEquipment,
  kDivision,
  kEvent,
  kBodyweight,
  kSquat,
  kBench,
  kDeadlift,
  kTotal,
};

// Empty cell -> NaN (missing); unparseable or non-finite -> nullopt.
std::optional<double> read_cell(std::string_view text) {
  if (trim(text).empty()) return std::nan("");
  auto value = csv::parse_number(text);
  if (!value || !std::isfinite(*value)) return std::nullopt;
  return value;
}

bool present_positive(double v) { return !std::isnan(v) && v > 0.0; }

// Classifies one data row. Returns the entry or the first failing reason.
std::variant<LifterEntry, DropReason> classify(const std::vector<std::string>& row,
                                               const ColumnMap& map, const FilterPolicy& policy) {
  if (row.size() != map.width) return DropReason::MalformedRow;
  auto cell = [&](Column c) -> std::string_view { return row[map.required[c]]; };

  const auto sex = parse_sex(trim(cell(kSex)));
  if (!sex || (policy.sex && *policy.sex != *sex)) return DropReason::Sex;

  const Equipment equipment = parse_equipment(trim(cell(kEquipment)));
  if (policy.require_raw && equipment != Equipment::Raw) return DropReason::Equipment;

  const std::string_view division = trim(cell(kDivision));
  if (policy.require_open_division && !icontains(division, "open")) return DropReason::Division;

  const std::string_view event = trim(cell(kEvent));
  if (policy.require_full_event && event != "SBD") return DropReason::Event;

  std::array<double, 5> values{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto v = read_cell(cell(static_cast<Column>(kBodyweight + i)));
    if (!v) return DropReason::MalformedNumber;
    values[i] = *v;
  }
  const auto [bodyweight, squat, bench, deadlift, total] = values;

  if (!present_positive(bodyweight)) return DropReason::MissingBodyweight;
  // Upstream writes a failed best attempt as a negative number.
  if (!present_positive(squat) || !present_positive(bench) || !present_positive(deadlift)) {
    return DropReason::MissingLift;
  }
  if (!present_positive(total)) return DropReason::MissingTotal;
  if (std::abs(total - (squat + bench + deadlift)) > kTotalSlackKg) {
    return DropReason::InconsistentTotal;
  }
  if (policy.bodyweight_range) {
    const auto [lo, hi] = *policy.bodyweight_range;
    if (bodyweight < lo || bodyweight > hi) return DropReason::BodyweightRange;
  }

  LifterEntry entry;
  entry.sex = *sex;
  entry.bodyweight_kg = bodyweight;
  entry.best_squat_kg = squat;
  entry.best_bench_kg = bench;
  entry.best_deadlift_kg = deadlift;
  entry.total_kg = total;
  entry.equipment = equipment;
  entry.division = std::string(division);
  entry.event = std::string(event);
  return entry;
}

}  // namespace

std::string_view equipment_name(Equipment equipment) {
  switch (equipment) {
    case Equipment::Raw: return "Raw";
    case Equipment::Wraps: return "Wraps";
    case Equipment::SinglePly: return "Single-ply";
    case Equipment::MultiPly: return "Multi-ply";
    case Equipment::Unlimited: return "Unlimited";
    case Equipment::Straps: return "Straps";
    case Equipment::Other: break;
  }
  return "Other";
}

Equipment parse_equipment(std::string_view text) {
  for (auto e : {Equipment::Raw, Equipment::Wraps, Equipment::SinglePly, Equipment::MultiPly,
                 Equipment::Unlimited, Equipment::Straps}) {
    if (iequals(text, equipment_name(e))) return e;
  }
  return Equipment::Other;
}

bool is_valid(const LifterEntry& e) {
  const bool positive = e.bodyweight_kg > 0.0 && e.total_kg > 0.0 && e.best_squat_kg > 0.0 &&
                        e.best_bench_kg > 0.0 && e.best_deadlift_kg > 0.0;
  const bool finite = std::isfinite(e.bodyweight_kg) && std::isfinite(e.total_kg);
  return positive && finite &&
         std::abs(e.total_kg - (e.best_squat_kg + e.best_bench_kg + e.best_deadlift_kg)) <=
             kTotalSlackKg;
}

void FilterPolicy::validate() const {
  if (bodyweight_range && !(bodyweight_range->first < bodyweight_range->second)) {
    throw ConfigError("bodyweight range must satisfy min < max");
  }
}

std::string_view drop_reason_name(DropReason reason) {
  return kDropReasonNames[static_cast<std::size_t>(reason)];
}

std::size_t IngestStats::dropped_total() const {
  return std::accumulate(dropped.begin(), dropped.end(), std::size_t{0});
}

std::string IngestStats::to_json() const {
  nlohmann::ordered_json j;
  j["total_rows"] = total_rows;
  j["kept"] = kept;
  nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kDropReasonCount; ++i) reasons[std::string(kDropReasonNames[i])] = dropped[i];
  j["dropped_by_reason"] = std::move(reasons);
  j["dropped"] = dropped_total();
  return j.dump(2) + "\n";
}

IngestResult parse_csv(std::istream& in, const FilterPolicy& policy, const ParseOptions& options) {
  policy.validate();
  csv::Reader reader(in);
  std::vector<std::string> row;
  IngestResult result;
  if (!reader.next(row)) {
    // A file without even a header row has no columns at all.
    throw SchemaError("missing required column '" + std::string(kRequiredColumns.front()) + "'");
  }
  const ColumnMap map = map_columns(row, options);

  while (reader.next(row)) {
    if (row.size() == 1 && row.front().empty() && map.width != 1) continue;  // blank line
    ++result.stats.total_rows;
    auto outcome = classify(row, map, policy);
    if (auto* reason = std::get_if<DropReason>(&outcome)) {
      ++result.stats.dropped[static_cast<std::size_t>(*reason)];
      continue;
    }
    ++result.stats.kept;
    result.entries.push_back(std::move(std::get<LifterEntry>(outcome)));
    if (!map.extras.empty()) {
      std::vector<std::string> extra;
      extra.reserve(map.extras.size());
      for (std::size_t idx : map.extras) extra.push_back(row[idx]);
      result.extras.push_back(std::move(extra));
    }
  }
  if (in.bad()) throw IoError("read error while parsing CSV");
  return result;
}

IngestResult parse_csv(const std::filesystem::path& path, const FilterPolicy& policy,
                       const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_csv(in, policy, options);
}

std::vector<std::string> read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  csv::Reader reader(in, 1 << 16);
  std::vector<std::string> header;
  if (!reader.next(header)) header.clear();
  return header;
}

std::vector<std::string> normalized_fields(const LifterEntry& e) {
  return {
      std::string(sex_code(e.sex)),
      std::string(equipment_name(e.equipment)),
      e.division,
      e.event,
      csv::format_fixed(e.bodyweight_kg, 2),
      csv::format_fixed(e.best_squat_kg, 2),
      csv::format_fixed(e.best_bench_kg, 2),
      csv::format_fixed(e.best_deadlift_kg, 2),
      csv::format_fixed(e.total_kg, 2),
  };
}

void write_normalized_csv(std::ostream& out, std::span<const LifterEntry> entries) {
  csv::write_row(out, std::vector<std::string>(kRequiredColumns.begin(), kRequiredColumns.end()));
  for (const auto& e : entries) csv::write_row(out, normalized_fields(e));
}

void write_normalized_csv(const std::filesystem::path& path, std::span<const LifterEntry> entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_normalized_csv(out, entries);
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

std::vector<double> bodyweights(std::span<const LifterEntry> entries) {
  std::vector<double> xs;
  xs.reserve(entries.size());
  for (const auto& e : entries) xs.push_back(e.bodyweight_kg);
  return xs;
}

}  // namespace liftcurve
