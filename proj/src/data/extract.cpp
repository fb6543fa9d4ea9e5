#include "newsgraph/data/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "newsgraph/errors.hpp"

namespace newsgraph::data {

namespace {

constexpr std::array<std::string_view, 9> kLegalSuffixes = {
    "Inc.", "Inc", "Corp.", "Corp", "Corporation", "Ltd.", "Ltd", "Co.", "Co"};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) != 0)) s.remove_prefix(1);
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) != 0 || s.back() == ',')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string normalize_company_name(std::string_view name) {
  std::string_view s = trim(name);
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (std::string_view suffix : kLegalSuffixes) {
      if (s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix &&
          !is_word_char(s[s.size() - suffix.size() - 1])) {
        s = trim(s.substr(0, s.size() - suffix.size()));
        stripped = true;
        break;
      }
    }
  }
  return std::string(s);
}

CompanyMatcher::CompanyMatcher(const Screener& screener) {
  if (screener.empty()) throw DataError("company extraction needs a non-empty screener");
  for (const auto& entry : screener.entries()) {
    const std::string name = normalize_company_name(entry.name);
    if (!name.empty()) buckets_[name.front()].push_back({name, entry.symbol});
    if (entry.symbol.size() >= 2) buckets_[entry.symbol.front()].push_back({entry.symbol, entry.symbol});
  }
  for (auto& [first, patterns] : buckets_) {
    std::stable_sort(patterns.begin(), patterns.end(), [](const Pattern& a, const Pattern& b) {
      return a.text.size() > b.text.size();
    });
  }
}

std::vector<std::string> CompanyMatcher::find_all(std::string_view text) const {
  std::vector<std::string> found;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (pos > 0 && is_word_char(text[pos - 1])) {
      ++pos;
      continue;
    }
    const auto bucket = buckets_.find(text[pos]);
    std::size_t advance = 1;
    if (bucket != buckets_.end()) {
      for (const auto& p : bucket->second) {
        const std::size_t end = pos + p.text.size();
        if (end > text.size() || text.compare(pos, p.text.size(), p.text) != 0) continue;
        if (end < text.size() && is_word_char(text[end])) continue;
        if (std::find(found.begin(), found.end(), p.symbol) == found.end()) found.push_back(p.symbol);
        advance = p.text.size();
        break;
      }
    }
    pos += advance;
  }
  return found;
}

std::optional<Extraction> CompanyMatcher::extract(std::string_view title, std::string_view content) const {
  std::vector<std::string> symbols = find_all(title);
  for (auto& s : find_all(content)) {
    if (std::find(symbols.begin(), symbols.end(), s) == symbols.end()) symbols.push_back(std::move(s));
  }
  if (symbols.empty()) return std::nullopt;
  Extraction out;
  out.main_symbol = symbols.front();
  out.mentioned_symbols.assign(symbols.begin() + 1, symbols.end());
  return out;
}

}  // namespace newsgraph::data
