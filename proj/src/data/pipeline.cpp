#include "newsgraph/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "newsgraph/data/extract.hpp"
#include "newsgraph/errors.hpp"

namespace newsgraph::data {

PreparedDataset prepare(const Screener& screener, const std::vector<PriceSeries>& prices,
                        std::vector<Article> articles, const std::vector<EmbeddingRecord>* embeddings,
                        const PrepareOptions& options) {
  if (screener.empty()) throw DataError("prepare: empty screener");
  options.significance.validate();
  PreparedDataset ds;
  ds.schema = options.schema;
  auto& st = ds.stats;
  st.companies_in_prices = prices.size();

  // Universe: price series whose symbol is in the screener.
  std::vector<const PriceSeries*> universe;
  std::vector<Date> days;
  for (const auto& s : prices) {
    if (!screener.contains(s.symbol)) {
      ++st.companies_outside_screener;
      continue;
    }
    universe.push_back(&s);
    for (const auto& bar : s.bars) days.push_back(bar.date);
  }
  if (universe.empty()) throw DataError("prepare: no price series belongs to the screener");
  std::sort(universe.begin(), universe.end(), [](const auto* a, const auto* b) { return a->symbol < b->symbol; });
  for (std::size_t i = 1; i < universe.size(); ++i) {
    if (universe[i]->symbol == universe[i - 1]->symbol) throw DataError("prepare: duplicate price series " + universe[i]->symbol);
  }
  ds.calendar = Calendar(std::move(days));
  for (const auto* s : universe) {
    const auto* entry = screener.find(s->symbol);
    ds.companies.push_back({entry->symbol, entry->name, entry->industry});
    std::vector<double> closes(ds.calendar.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& bar : s->bars) closes[*ds.calendar.index_of(bar.date)] = bar.close;
    ds.closes.push_back(std::move(closes));
  }

  // Company extraction and symbol validation.
  const CompanyMatcher matcher(screener);
  std::vector<Article> kept;
  st.articles_read = articles.size();
  for (auto& a : articles) {
    if (a.main_symbol.empty()) {
      const auto found = matcher.extract(a.title, a.content);
      if (!found) {
        ++st.articles_without_match;
        continue;
      }
      a.main_symbol = found->main_symbol;
      a.mentioned_symbols = found->mentioned_symbols;
      ++st.articles_extracted;
    }
    if (!ds.company_index(a.main_symbol)) {
      ++st.articles_unknown_main;
      continue;
    }
    std::vector<std::string> mentioned;
    for (auto& s : a.mentioned_symbols) {
      if (s == a.main_symbol || std::find(mentioned.begin(), mentioned.end(), s) != mentioned.end()) continue;
      if (!ds.company_index(s)) {
        ++st.mentions_unknown;
        continue;
      }
      mentioned.push_back(std::move(s));
    }
    a.mentioned_symbols = std::move(mentioned);
    kept.push_back(std::move(a));
  }

  Alignment aligned = align(std::move(kept), ds.calendar);
  st.articles_before_calendar = aligned.dropped_before_calendar;
  st.articles_after_calendar = aligned.dropped_after_calendar;

  std::vector<Article> to_embed;
  to_embed.reserve(aligned.articles.size());
  for (auto& a : aligned.articles) to_embed.push_back(std::move(a.article));
  if (options.stub_embedder) {
    for (auto& a : to_embed) a.embedding = stub_embed_article(a, options.embedding_mode, options.stub_dim, options.stub_seed);
    ds.embedding_dim = options.stub_dim;
  } else {
    if (embeddings == nullptr) throw ConfigError("prepare: no embedding file and the stub embedder is off");
    attach_embeddings(to_embed, *embeddings, options.embedding_mode);
    if (!to_embed.empty()) {
      ds.embedding_dim = to_embed.front().embedding.size();
    } else if (!embeddings->empty()) {
      ds.embedding_dim = embeddings->front().values.size();
    }
  }
  if (ds.embedding_dim == 0) ds.embedding_dim = options.stub_dim;
  for (std::size_t i = 0; i < to_embed.size(); ++i) {
    auto& a = to_embed[i];
    ds.articles.push_back({std::move(a.id), aligned.articles[i].day, std::move(a.main_symbol),
                           std::move(a.mentioned_symbols), std::move(a.embedding)});
  }

  compute_labels(ds, options.significance);

  const auto days_ok = usable_days(ds, options.features);
  SplitSpec spec;
  if (options.split.train_days || options.split.test_days) {
    if (!options.split.train_days || !options.split.test_days) {
      throw ConfigError("split.train_days and split.test_days must be given together");
    }
    spec = {*options.split.train_days, *options.split.test_days};
  } else {
    spec = split_by_fraction(days_ok.size(), options.split.train_fraction);
  }
  const Split split = chronological_split(days_ok, spec);
  ds.train_days = split.train;
  ds.test_days = split.test;
  return ds;
}

std::vector<std::size_t> usable_days(const PreparedDataset& ds, const model::FeatureSpec& features) {
  std::vector<std::size_t> out;
  const std::size_t need = features.history();
  for (std::size_t d = need; d < ds.calendar.size(); ++d) {
    for (std::size_t c = 0; c < ds.companies.size(); ++c) {
      if (ds.direction[c][d] < 0) continue;
      const std::span<const double> history(ds.closes[c].data(), d);
      if (model::window_features(history, features)) {
        out.push_back(d);
        break;
      }
    }
  }
  return out;
}

std::string leakage_report(const PreparedDataset& ds, const graph::GraphConfig& config) {
  std::size_t snapshots = 0, article_nodes = 0, complete = 0;
  std::size_t min_age = std::numeric_limits<std::size_t>::max(), max_age = 0;
  const std::size_t boundary = ds.test_days.empty() ? ds.calendar.size() : ds.test_days.front();
  std::size_t test_only_articles = 0;
  std::map<std::string, std::size_t> article_day;
  for (const auto& a : ds.articles) article_day.emplace(a.id, a.day);

  auto check = [&](std::size_t day, bool train) {
    const auto snap = graph::build_snapshot(day, ds, config);
    ++snapshots;
    for (std::size_t id = 0; id < snap.size(); ++id) {
      const auto& node = snap.node(id);
      if (node.ref.kind == graph::NodeKind::Article) {
        const std::size_t a_day = article_day.at(node.ref.key);
        if (a_day >= day || day - a_day > config.window_days) {
          throw DataError("leakage: article " + node.ref.key + " (day " + std::to_string(a_day) +
                          ") in snapshot for day " + std::to_string(day));
        }
        if (train && a_day >= boundary) {
          throw DataError("leakage: test-period article " + node.ref.key + " in training snapshot");
        }
        if (!train && a_day >= boundary) ++test_only_articles;
        ++article_nodes;
        min_age = std::min(min_age, node.age);
        max_age = std::max(max_age, node.age);
      } else if (snap.complete(id)) {
        ++complete;
      }
    }
  };
  for (std::size_t d : ds.train_days) check(d, true);
  for (std::size_t d : ds.test_days) check(d, false);

  std::ostringstream out;
  out << "leakage check: passed\n";
  out << "snapshots checked\t" << snapshots << '\n';
  out << "article nodes\t" << article_nodes << '\n';
  out << "article age range\t";
  if (article_nodes == 0) {
    out << "n/a\n";
  } else {
    out << min_age << ".." << max_age << " trading days\n";
  }
  out << "complete company windows\t" << complete << " (each ends the day before its target)\n";
  out << "test-period article nodes (test snapshots only)\t" << test_only_articles << '\n';
  return out.str();
}

std::string prepare_summary(const PreparedDataset& ds) {
  const auto& s = ds.stats;
  std::ostringstream out;
  out << "trading days\t" << ds.calendar.size() << '\n';
  out << "companies\t" << ds.companies.size() << " (" << s.companies_outside_screener << " outside screener)\n";
  out << "articles read\t" << s.articles_read << '\n';
  out << "articles kept\t" << ds.articles.size() << '\n';
  out << "articles extracted from text\t" << s.articles_extracted << '\n';
  out << "dropped: no company match\t" << s.articles_without_match << '\n';
  out << "dropped: main symbol outside universe\t" << s.articles_unknown_main << '\n';
  out << "dropped: before first trading day\t" << s.articles_before_calendar << '\n';
  out << "dropped: after last trading day\t" << s.articles_after_calendar << '\n';
  out << "mentions outside universe\t" << s.mentions_unknown << '\n';
  out << "direction labels\t" << s.direction_labels << " (" << s.direction_skipped << " skipped)\n";
  out << "significance labels\t" << s.significance_labels << " (" << s.significance_positive << " positive, "
      << s.significance_skipped << " skipped for short history)\n";
  out << "embedding dim\t" << ds.embedding_dim << '\n';
  out << "train days\t" << ds.train_days.size() << '\n';
  out << "test days\t" << ds.test_days.size() << '\n';
  return out.str();
}

}  // namespace newsgraph::data
