#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/data/records.hpp"

namespace newsgraph::data {

struct Extraction {
  std::string main_symbol;
  std::vector<std::string> mentioned_symbols;
};

// Company name with trailing legal suffixes (Inc., Corp., Corporation, Ltd.,
// Co.) removed.
std::string normalize_company_name(std::string_view name);

// Screener lookup over article text. Patterns are the normalized company names
// and the tickers themselves (two characters or more); matching is
// case-sensitive, longest first, and only at word boundaries.
class CompanyMatcher {
 public:
  explicit CompanyMatcher(const Screener& screener);

  // Symbols in order of first appearance, without repeats.
  std::vector<std::string> find_all(std::string_view text) const;

  // Main symbol is the first match in the title, else the first in the
  // content; every other match is a mentioned symbol. nullopt when nothing
  // matches.
  std::optional<Extraction> extract(std::string_view title, std::string_view content) const;

 private:
  struct Pattern {
    std::string text;
    std::string symbol;
  };
  // Bucketed by first character, each bucket longest first.
  std::map<char, std::vector<Pattern>> buckets_;
};

}  // namespace newsgraph::data
