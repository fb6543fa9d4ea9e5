#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/data/calendar.hpp"

namespace newsgraph::data {

struct ScreenerEntry {
  std::string symbol;
  std::string name;
  std::string industry;
};

class Screener {
 public:
  Screener() = default;
  explicit Screener(std::vector<ScreenerEntry> entries);

  const std::vector<ScreenerEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  const ScreenerEntry* find(const std::string& symbol) const;
  bool contains(const std::string& symbol) const { return find(symbol) != nullptr; }

 private:
  std::vector<ScreenerEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_symbol_;
};

struct Article {
  std::string id;
  Date date;
  std::string title;
  std::string content;
  std::string main_symbol;  // empty until extracted
  std::vector<std::string> mentioned_symbols;
  std::vector<double> embedding;  // empty until attached
};

struct PriceBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

struct PriceSeries {
  std::string symbol;
  std::vector<PriceBar> bars;  // strictly increasing dates
};

struct EmbeddingRecord {
  std::string id;
  std::vector<double> values;
  std::size_t line = 0;
};

// symbol,name,industry
Screener read_screener(const std::filesystem::path& path);
void write_screener(const std::filesystem::path& path, const Screener& screener);

// date,symbol,open,high,low,close,volume ; result sorted by symbol
std::vector<PriceSeries> read_prices(const std::filesystem::path& path);
void write_prices(const std::filesystem::path& path, const std::vector<PriceSeries>& series);

// id,date,title,content,main_symbol,mentioned_symbols (mentioned separated by ';')
std::vector<Article> read_news(const std::filesystem::path& path);
void write_news(const std::filesystem::path& path, const std::vector<Article>& articles);

// One record per line, no header: id,dim,v1,...,v_dim
std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingRecord>& records);

}  // namespace newsgraph::data
