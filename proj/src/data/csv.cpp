#include "newsgraph/data/csv.hpp"

#include <charconv>
#include <cmath>

#include "newsgraph/errors.hpp"

namespace newsgraph::data {

CsvReader::CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

bool CsvReader::next(CsvRecord& record) {
  record.fields.clear();
  record.line = line_;
  if (in_.peek() == std::char_traits<char>::eof()) return false;

  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  int c;
  while ((c = in_.get()) != std::char_traits<char>::eof()) {
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!field.empty() || field_was_quoted) {
        throw DataError(source_, line_, "#" + std::to_string(record.fields.size() + 1),
                        "stray quote inside unquoted field");
      }
      quoted = true;
      field_was_quoted = true;
    } else if (ch == ',') {
      record.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\r' && in_.peek() == '\n') {
      continue;
    } else if (ch == '\n') {
      ++line_;
      record.fields.push_back(std::move(field));
      return true;
    } else {
      if (field_was_quoted) {
        throw DataError(source_, line_, "#" + std::to_string(record.fields.size() + 1),
                        "text after closing quote");
      }
      field.push_back(ch);
    }
  }
  if (quoted) {
    throw DataError(source_, record.line, "#" + std::to_string(record.fields.size() + 1),
                    "unterminated quoted field");
  }
  record.fields.push_back(std::move(field));
  return true;
}

void expect_header(CsvReader& reader, const std::vector<std::string>& expected) {
  CsvRecord header;
  if (!reader.next(header)) throw DataError(reader.source(), 1, "header", "missing header line");
  if (header.fields != expected) {
    throw DataError(reader.source(), header.line, "header",
                    "expected '" + csv_join(expected) + "', got '" + csv_join(header.fields) + "'");
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  return out;
}

double parse_double(std::string_view text, const std::string& file, std::size_t line,
                    const std::string& field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(file, line, field, "not a number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) throw DataError(file, line, field, "non-finite value");
  return value;
}

std::size_t parse_size(std::string_view text, const std::string& file, std::size_t line,
                       const std::string& field) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(file, line, field, "not a non-negative integer: '" + std::string(text) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace newsgraph::data
