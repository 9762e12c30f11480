#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace liftcurve::csv {

// Streaming RFC 4180 reader: comma separated, double-quote escaping, quoted
// fields may span lines, CRLF or LF line endings, leading UTF-8 BOM skipped.
class Reader {
 public:
  explicit Reader(std::istream& in, std::size_t buffer_size = 1 << 20);

  // Reads the next record into `fields`. Returns false at end of input.
  // A completely empty line yields a single empty field.
  bool next(std::vector<std::string>& fields);

  // 1-based line number where the most recent record started.
  std::size_t record_line() const { return record_line_; }

 private:
  int peek();
  int get();
  bool refill();

  std::istream& in_;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  bool first_ = true;
};

// Parses a decimal number (locale independent). Leading/trailing spaces are
// tolerated. Returns nullopt for empty or malformed text.
std::optional<double> parse_number(std::string_view text);

// Fixed-point formatting, locale independent ("%.Nf").
std::string format_fixed(double value, int decimals);

// Shortest representation that round-trips to the same double.
std::string format_shortest(double value);

// Quotes a field if it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace liftcurve::csv
