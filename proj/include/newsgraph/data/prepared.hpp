#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/data/calendar.hpp"
#include "newsgraph/labels.hpp"

namespace newsgraph::data {

enum class Schema { UsEquities, Bloomberg };

Schema parse_schema(std::string_view text);
std::string_view to_string(Schema schema);

struct Company {
  std::string symbol;
  std::string name;
  std::string industry;
};

struct PreparedArticle {
  std::string id;
  std::size_t day = 0;  // calendar index the article is keyed to
  std::string main_symbol;
  std::vector<std::string> mentioned_symbols;
  std::vector<double> embedding;
};

struct PrepareStats {
  std::size_t companies_in_prices = 0;
  std::size_t companies_outside_screener = 0;
  std::size_t articles_read = 0;
  std::size_t articles_extracted = 0;
  std::size_t articles_without_match = 0;
  std::size_t articles_unknown_main = 0;
  std::size_t mentions_unknown = 0;
  std::size_t articles_before_calendar = 0;
  std::size_t articles_after_calendar = 0;
  std::size_t direction_labels = 0;
  std::size_t direction_skipped = 0;
  std::size_t significance_labels = 0;
  std::size_t significance_positive = 0;
  std::size_t significance_skipped = 0;
};

// Everything the graph builder and the training loop need, computed once.
struct PreparedDataset {
  Schema schema = Schema::UsEquities;
  Calendar calendar;
  std::vector<Company> companies;              // sorted by symbol
  std::vector<std::vector<double>> closes;     // [company][day], NaN when missing
  std::vector<std::vector<std::int8_t>> direction;     // [company][day], -1 when missing
  std::vector<std::vector<std::int8_t>> significance;  // [company][day], -1 when skipped
  std::vector<PreparedArticle> articles;       // sorted by (day, id)
  std::size_t embedding_dim = 0;
  std::vector<std::size_t> train_days;         // calendar indices
  std::vector<std::size_t> test_days;
  PrepareStats stats;

  std::optional<int> label(labels::TargetMode mode, std::size_t company, std::size_t day) const;
  std::optional<std::size_t> company_index(const std::string& symbol) const;
};

// Direction and significance labels for every (company, day) from the close
// matrix. Updates the label counters in `stats`.
void compute_labels(PreparedDataset& dataset, const labels::LabelSpec& significance_spec);

// Deterministic JSON container.
void save_prepared(const std::filesystem::path& path, const PreparedDataset& dataset);
PreparedDataset load_prepared(const std::filesystem::path& path);

}  // namespace newsgraph::data
