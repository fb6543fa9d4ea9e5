#pragma once

#include <algorithm>
#include <chrono>
#include <tuple>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "newsgraph/data/calendar.hpp"
#include "newsgraph/data/prepared.hpp"
#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/model/gnn.hpp"

namespace fixtures {

using namespace newsgraph;

struct TinyArticle {
  std::string id;
  std::size_t day = 0;
  std::string main;
  std::vector<std::string> mentioned;
};

inline data::Calendar weekday_calendar(std::size_t n) {
  std::vector<data::Date> days;
  for (data::Date d = data::parse_date("2020-01-06"); days.size() < n; d += std::chrono::days{1}) {
    if (!data::is_weekend(d)) days.push_back(d);
  }
  return data::Calendar(days);
}

// Hand-built dataset: random-walk closes, Gaussian article embeddings.
inline data::PreparedDataset tiny_dataset(const std::vector<data::Company>& companies, std::size_t days,
                                          const std::vector<TinyArticle>& articles, std::size_t dim,
                                          std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  data::PreparedDataset ds;
  ds.calendar = weekday_calendar(days);
  ds.companies = companies;
  for (std::size_t c = 0; c < companies.size(); ++c) {
    std::vector<double> closes{50.0 + 10.0 * static_cast<double>(c)};
    while (closes.size() < days) closes.push_back(closes.back() * std::exp(0.02 * z(rng)));
    ds.closes.push_back(std::move(closes));
  }
  for (const auto& a : articles) {
    data::PreparedArticle p;
    p.id = a.id;
    p.day = a.day;
    p.main_symbol = a.main;
    p.mentioned_symbols = a.mentioned;
    for (std::size_t i = 0; i < dim; ++i) p.embedding.push_back(z(rng));
    ds.articles.push_back(std::move(p));
  }
  std::sort(ds.articles.begin(), ds.articles.end(),
            [](const auto& x, const auto& y) { return std::tie(x.day, x.id) < std::tie(y.day, y.id); });
  ds.embedding_dim = dim;
  data::compute_labels(ds, {labels::TargetMode::Significance, 0.04, 5});
  return ds;
}

// Three companies in two industries; two articles in the window of day 20.
inline data::PreparedDataset toy_dataset(std::size_t dim = 3) {
  return tiny_dataset({{"AAA", "Alpha", "Energy"}, {"BBB", "Beta", "Energy"}, {"CCC", "Gamma", "Retail"}}, 25,
                      {{"a1", 18, "AAA", {"BBB"}}, {"a2", 19, "CCC", {"AAA"}}}, dim, 3);
}

// Architecture of the full model at toy widths.
inline model::ModelConfig toy_model_config(std::size_t article_dim, std::size_t steps = 4) {
  model::ModelConfig mc;
  mc.node_dim = 5;
  mc.layers = 3;
  mc.company_embedding = 3;
  mc.industry_embedding = 4;
  mc.lstm_hidden = 3;
  mc.lstm_layers = 2;
  mc.features.steps = steps;
  mc.article_dim = article_dim;
  return mc;
}

inline graph::GraphConfig toy_graph_config(std::size_t steps = 4) {
  graph::GraphConfig cfg;
  cfg.features.steps = steps;
  return cfg;
}

inline std::vector<std::string> symbols(const data::PreparedDataset& ds) {
  std::vector<std::string> out;
  for (const auto& c : ds.companies) out.push_back(c.symbol);
  return out;
}

inline std::vector<std::string> industries(const data::PreparedDataset& ds) {
  std::vector<std::string> out;
  for (const auto& c : ds.companies) {
    if (!c.industry.empty() && std::find(out.begin(), out.end(), c.industry) == out.end()) out.push_back(c.industry);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixtures
