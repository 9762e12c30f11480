#include "liftcurve/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace liftcurve::csv {

Reader::Reader(std::istream& in, std::size_t buffer_size) : in_(in), buffer_(buffer_size) {}

bool Reader::refill() {
  if (!in_) return false;
  in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  end_ = static_cast<std::size_t>(in_.gcount());
  pos_ = 0;
  return end_ > 0;
}

int Reader::peek() {
  if (pos_ == end_ && !refill()) return -1;
  return static_cast<unsigned char>(buffer_[pos_]);
}

int Reader::get() {
  const int c = peek();
  if (c >= 0) ++pos_;
  return c;
}

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  if (first_) {
    first_ = false;
    // UTF-8 byte order mark.
    if (peek() == 0xEF) {
      get();
      if (get() != 0xBB || get() != 0xBF) {
        throw std::runtime_error("csv: malformed byte order mark");
      }
    }
  }
  if (peek() < 0) return false;

  record_line_ = line_;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (;;) {
    const int c = get();
    if (c < 0) {
      fields.push_back(std::move(field));
      return true;
    }
    if (quoted) {
      if (c == '"') {
        if (peek() == '"') {
          get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    switch (c) {
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        break;
      case '"':
        if (field.empty() && !field_was_quoted) {
          quoted = true;
          field_was_quoted = true;
        } else {
          field.push_back('"');
        }
        break;
      case '\r':
        if (peek() == '\n') get();
        ++line_;
        fields.push_back(std::move(field));
        return true;
      case '\n':
        ++line_;
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(static_cast<char>(c));
    }
  }
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw std::runtime_error("csv: number too large to format");
  std::string out(buf.data(), ptr);
  // "-0.00" reads badly in exports.
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string format_shortest(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("csv: number too large to format");
  return std::string(buf.data(), ptr);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace liftcurve::csv
