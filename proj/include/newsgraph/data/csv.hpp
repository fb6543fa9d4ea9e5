#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace newsgraph::data {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: comma separated, double-quote quoting, "" escapes a quote,
// quoted fields may span lines. CRLF and LF line endings are both accepted.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source);

  // False at end of input.
  bool next(CsvRecord& record);
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 1;
};

// Reads the header and checks it equals `expected` exactly.
void expect_header(CsvReader& reader, const std::vector<std::string>& expected);

std::string csv_escape(std::string_view field);
std::string csv_join(const std::vector<std::string>& fields);

double parse_double(std::string_view text, const std::string& file, std::size_t line,
                    const std::string& field);
std::size_t parse_size(std::string_view text, const std::string& file, std::size_t line,
                       const std::string& field);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace newsgraph::data
