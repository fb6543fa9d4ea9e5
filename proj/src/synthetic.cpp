#include "newsgraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "newsgraph/errors.hpp"
#include "newsgraph/seed.hpp"

namespace newsgraph::synthetic {

namespace {

std::string ticker(std::size_t index) {
  std::string s(3, 'A');
  for (std::size_t i = 3; i-- > 0;) {
    s[i] = static_cast<char>('A' + index % 26);
    index /= 26;
  }
  return s;
}

std::string padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, value);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (companies == 0 || industries == 0 || days == 0) throw ConfigError("synth counts must be positive");
  if (companies > 26 * 26 * 26) throw ConfigError("synth.companies too large");
  if (industries > companies) throw ConfigError("synth.industries cannot exceed synth.companies");
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) throw ConfigError("synth.signal_strength must lie in [0, 1]");
  if (!(rate_min > 0.0 && rate_max >= rate_min)) throw ConfigError("synth article rates need 0 < rate_min <= rate_max");
  if (!(mention_rate >= 0.0)) throw ConfigError("synth.mention_rate must be non-negative");
  if (embedding_dim == 0) throw ConfigError("synth.embedding_dim must be positive");
  if (!(volatility_min > 0.0 && volatility_max >= volatility_min)) {
    throw ConfigError("synth volatilities need 0 < volatility_min <= volatility_max");
  }
  data::parse_date(start_date);
}

Corpus generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 structure(derive_seed(cfg.seed, "synth.structure"));
  std::mt19937_64 embedding_rng(derive_seed(cfg.seed, "synth.embedding"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Corpus corpus;
  std::vector<data::ScreenerEntry> entries;
  std::vector<std::size_t> industry_of(cfg.companies);
  std::vector<std::vector<std::size_t>> members(cfg.industries);
  for (std::size_t c = 0; c < cfg.companies; ++c) {
    industry_of[c] = c % cfg.industries;
    members[industry_of[c]].push_back(c);
    entries.push_back({ticker(c), "Synthetic " + ticker(c) + " Inc.", "Industry " + padded(industry_of[c], 2)});
  }
  corpus.screener = data::Screener(entries);

  std::vector<data::Date> calendar;
  for (data::Date d = data::parse_date(cfg.start_date); calendar.size() < cfg.days; d += std::chrono::days{1}) {
    if (!data::is_weekend(d)) calendar.push_back(d);
  }

  std::vector<std::vector<double>> closes(cfg.companies);
  for (std::size_t c = 0; c < cfg.companies; ++c) {
    const double vol = cfg.volatility_min + (cfg.volatility_max - cfg.volatility_min) * unit(structure);
    double close = 20.0 + 180.0 * unit(structure);
    data::PriceSeries series;
    series.symbol = ticker(c);
    for (std::size_t t = 0; t < cfg.days; ++t) {
      const double open = close;
      if (t > 0) close = open * std::exp(cfg.drift + vol * normal(structure));
      const double wiggle = 1.0 + 0.5 * vol * std::abs(normal(structure));
      data::PriceBar bar;
      bar.date = calendar[t];
      bar.open = open;
      bar.close = close;
      bar.high = std::max(open, close) * wiggle;
      bar.low = std::min(open, close) / wiggle;
      bar.volume = std::floor(1e5 + 9e5 * unit(structure));
      series.bars.push_back(bar);
      closes[c].push_back(close);
    }
    corpus.prices.push_back(std::move(series));
  }

  std::vector<double> rate(cfg.companies);
  const double log_lo = std::log(cfg.rate_min), log_hi = std::log(cfg.rate_max);
  for (double& r : rate) r = std::exp(log_lo + (log_hi - log_lo) * unit(structure));

  // Shared signal direction.
  std::vector<double> direction(cfg.embedding_dim);
  double norm = 0.0;
  for (double& v : direction) {
    v = normal(embedding_rng);
    norm += v * v;
  }
  for (double& v : direction) v /= std::sqrt(norm);

  std::size_t counter = 0;
  for (std::size_t t = 0; t < cfg.days; ++t) {
    for (std::size_t c = 0; c < cfg.companies; ++c) {
      const std::size_t n = std::poisson_distribution<std::size_t>(rate[c])(structure);
      for (std::size_t k = 0; k < n; ++k) {
        data::Article a;
        a.id = "n" + padded(counter++, 7);
        a.date = calendar[t];
        a.main_symbol = ticker(c);
        std::vector<std::size_t> peers;
        for (std::size_t p : members[industry_of[c]]) {
          if (p != c) peers.push_back(p);
        }
        std::size_t mentions = cfg.mention_rate > 0.0
                                   ? std::poisson_distribution<std::size_t>(cfg.mention_rate)(structure)
                                   : 0;
        mentions = std::min(mentions, peers.size());
        for (std::size_t m = 0; m < mentions; ++m) {
          const std::size_t pick = m + static_cast<std::size_t>(unit(structure) * static_cast<double>(peers.size() - m));
          std::swap(peers[m], peers[std::min(pick, peers.size() - 1)]);
        }
        peers.resize(mentions);
        std::sort(peers.begin(), peers.end());
        a.title = entries[c].name + " update " + a.id;
        a.content = entries[c].name + " reported company news.";
        for (std::size_t p : peers) {
          a.mentioned_symbols.push_back(ticker(p));
          a.content += " Analysts compared it with " + entries[p].name + ".";
        }

        data::EmbeddingRecord rec;
        rec.id = a.id;
        const bool signal = unit(embedding_rng) < cfg.signal_strength;
        rec.values.resize(cfg.embedding_dim);
        for (double& v : rec.values) v = normal(embedding_rng);
        // Conditioned only on the move from t to t + 1.
        if (signal && t + 1 < cfg.days) {
          const double y = closes[c][t + 1] > closes[c][t] ? 1.0 : -1.0;
          for (std::size_t d = 0; d < cfg.embedding_dim; ++d) rec.values[d] += cfg.signal_amplitude * y * direction[d];
        }
        corpus.articles.push_back(std::move(a));
        corpus.embeddings.push_back(std::move(rec));
      }
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  for (const auto* p : {&paths.prices, &paths.news, &paths.embeddings, &paths.screener}) {
    if (p->has_parent_path()) std::filesystem::create_directories(p->parent_path());
  }
  data::write_screener(paths.screener, corpus.screener);
  data::write_prices(paths.prices, corpus.prices);
  data::write_news(paths.news, corpus.articles);
  data::write_embeddings(paths.embeddings, corpus.embeddings);
}

}  // namespace newsgraph::synthetic
