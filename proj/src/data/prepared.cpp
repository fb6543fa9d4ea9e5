#include "newsgraph/data/prepared.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "newsgraph/errors.hpp"

namespace newsgraph::data {

using nlohmann::json;

Schema parse_schema(std::string_view text) {
  if (text == "us-equities") return Schema::UsEquities;
  if (text == "bloomberg") return Schema::Bloomberg;
  throw ConfigError("unknown schema '" + std::string(text) + "' (expected us-equities or bloomberg)");
}

std::string_view to_string(Schema schema) {
  return schema == Schema::UsEquities ? "us-equities" : "bloomberg";
}

std::optional<int> PreparedDataset::label(labels::TargetMode mode, std::size_t company, std::size_t day) const {
  const auto& table = mode == labels::TargetMode::Direction ? direction : significance;
  const std::int8_t v = table.at(company).at(day);
  if (v < 0) return std::nullopt;
  return v;
}

std::optional<std::size_t> PreparedDataset::company_index(const std::string& symbol) const {
  const auto it = std::lower_bound(companies.begin(), companies.end(), symbol,
                                   [](const Company& c, const std::string& s) { return c.symbol < s; });
  if (it == companies.end() || it->symbol != symbol) return std::nullopt;
  return static_cast<std::size_t>(it - companies.begin());
}

void compute_labels(PreparedDataset& ds, const labels::LabelSpec& spec) {
  const std::size_t days = ds.calendar.size();
  ds.direction.assign(ds.companies.size(), std::vector<std::int8_t>(days, -1));
  ds.significance.assign(ds.companies.size(), std::vector<std::int8_t>(days, -1));
  auto& st = ds.stats;
  st.direction_labels = st.direction_skipped = 0;
  st.significance_labels = st.significance_positive = st.significance_skipped = 0;
  for (std::size_t c = 0; c < ds.companies.size(); ++c) {
    const auto& closes = ds.closes[c];
    for (std::size_t d = 1; d < days; ++d) {
      const double now = closes[d], prev = closes[d - 1];
      if (std::isnan(now)) continue;
      if (std::isnan(prev)) {
        ++st.direction_skipped;
        ++st.significance_skipped;
        continue;
      }
      ds.direction[c][d] = static_cast<std::int8_t>(labels::label_direction(now, prev));
      ++st.direction_labels;
      // Trailing closes strictly before d, counted only over a gap-free run.
      std::size_t start = d;
      while (start > 0 && !std::isnan(closes[start - 1]) && d - start < spec.lookback) --start;
      const std::span<const double> trailing(closes.data() + start, d - start);
      const auto sig = labels::label_significant(now, prev, trailing, spec);
      if (!sig) {
        ++st.significance_skipped;
        continue;
      }
      ds.significance[c][d] = static_cast<std::int8_t>(*sig);
      ++st.significance_labels;
      st.significance_positive += static_cast<std::size_t>(*sig);
    }
  }
}

namespace {

json stats_to_json(const PrepareStats& s) {
  return json{{"companies_in_prices", s.companies_in_prices},
              {"companies_outside_screener", s.companies_outside_screener},
              {"articles_read", s.articles_read},
              {"articles_extracted", s.articles_extracted},
              {"articles_without_match", s.articles_without_match},
              {"articles_unknown_main", s.articles_unknown_main},
              {"mentions_unknown", s.mentions_unknown},
              {"articles_before_calendar", s.articles_before_calendar},
              {"articles_after_calendar", s.articles_after_calendar},
              {"direction_labels", s.direction_labels},
              {"direction_skipped", s.direction_skipped},
              {"significance_labels", s.significance_labels},
              {"significance_positive", s.significance_positive},
              {"significance_skipped", s.significance_skipped}};
}

PrepareStats stats_from_json(const json& j) {
  PrepareStats s;
  s.companies_in_prices = j.at("companies_in_prices");
  s.companies_outside_screener = j.at("companies_outside_screener");
  s.articles_read = j.at("articles_read");
  s.articles_extracted = j.at("articles_extracted");
  s.articles_without_match = j.at("articles_without_match");
  s.articles_unknown_main = j.at("articles_unknown_main");
  s.mentions_unknown = j.at("mentions_unknown");
  s.articles_before_calendar = j.at("articles_before_calendar");
  s.articles_after_calendar = j.at("articles_after_calendar");
  s.direction_labels = j.at("direction_labels");
  s.direction_skipped = j.at("direction_skipped");
  s.significance_labels = j.at("significance_labels");
  s.significance_positive = j.at("significance_positive");
  s.significance_skipped = j.at("significance_skipped");
  return s;
}

json label_row(const std::vector<std::int8_t>& row) {
  json out = json::array();
  for (std::int8_t v : row) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

void save_prepared(const std::filesystem::path& path, const PreparedDataset& ds) {
  json j;
  j["format"] = "newsgraph-prepared";
  j["version"] = 1;
  j["schema"] = std::string(to_string(ds.schema));
  json calendar = json::array();
  for (Date d : ds.calendar.days()) calendar.push_back(format_date(d));
  j["calendar"] = std::move(calendar);
  json companies = json::array();
  for (std::size_t c = 0; c < ds.companies.size(); ++c) {
    json closes = json::array();
    for (double v : ds.closes[c]) closes.push_back(std::isnan(v) ? json(nullptr) : json(v));
    companies.push_back({{"symbol", ds.companies[c].symbol},
                         {"name", ds.companies[c].name},
                         {"industry", ds.companies[c].industry},
                         {"closes", std::move(closes)},
                         {"direction", label_row(ds.direction[c])},
                         {"significance", label_row(ds.significance[c])}});
  }
  j["companies"] = std::move(companies);
  j["embedding_dim"] = ds.embedding_dim;
  json articles = json::array();
  for (const auto& a : ds.articles) {
    articles.push_back({{"id", a.id},
                        {"day", a.day},
                        {"main", a.main_symbol},
                        {"mentioned", a.mentioned_symbols},
                        {"embedding", a.embedding}});
  }
  j["articles"] = std::move(articles);
  j["split"] = {{"train", ds.train_days}, {"test", ds.test_days}};
  j["stats"] = stats_to_json(ds.stats);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << j.dump() << '\n';
}

PreparedDataset load_prepared(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid prepared dataset: " + e.what());
  }
  try {
    if (j.at("format") != "newsgraph-prepared" || j.at("version") != 1) {
      throw DataError(path.string() + ": not a version 1 prepared dataset");
    }
    PreparedDataset ds;
    ds.schema = parse_schema(j.at("schema").get<std::string>());
    std::vector<Date> days;
    for (const auto& d : j.at("calendar")) days.push_back(parse_date(d.get<std::string>()));
    ds.calendar = Calendar(std::move(days));
    for (const auto& c : j.at("companies")) {
      ds.companies.push_back({c.at("symbol"), c.at("name"), c.at("industry")});
      std::vector<double> closes;
      for (const auto& v : c.at("closes")) {
        closes.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      }
      if (closes.size() != ds.calendar.size()) throw DataError(path.string() + ": close row length mismatch");
      ds.closes.push_back(std::move(closes));
      ds.direction.push_back(c.at("direction").get<std::vector<std::int8_t>>());
      ds.significance.push_back(c.at("significance").get<std::vector<std::int8_t>>());
    }
    ds.embedding_dim = j.at("embedding_dim");
    for (const auto& a : j.at("articles")) {
      ds.articles.push_back({a.at("id"), a.at("day"), a.at("main"),
                             a.at("mentioned").get<std::vector<std::string>>(),
                             a.at("embedding").get<std::vector<double>>()});
    }
    ds.train_days = j.at("split").at("train").get<std::vector<std::size_t>>();
    ds.test_days = j.at("split").at("test").get<std::vector<std::size_t>>();
    ds.stats = stats_from_json(j.at("stats"));
    return ds;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed prepared dataset: " + e.what());
  }
}

}  // namespace newsgraph::data
