#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "newsgraph/data/records.hpp"

namespace newsgraph::synthetic {

struct SynthConfig {
  std::size_t companies = 30;
  std::size_t industries = 5;
  std::size_t days = 400;  // trading days, Monday to Friday
  std::string start_date = "2016-01-04";
  // Per-company article rate (articles per trading day), log-uniform in
  // [rate_min, rate_max].
  double rate_min = 1.5;
  double rate_max = 1.5;
  // Mean number of same-industry companies an article mentions.
  double mention_rate = 0.5;
  // Probability that an article's embedding carries its main company's
  // next-day move.
  double signal_strength = 1.0;
  double signal_amplitude = 2.0;
  std::size_t embedding_dim = 16;
  // Daily log-return drift and the per-company volatility range.
  double drift = 0.0;
  double volatility_min = 0.01;
  double volatility_max = 0.03;
  std::uint64_t seed = 7;

  void validate() const;
};

struct Corpus {
  data::Screener screener;
  std::vector<data::PriceSeries> prices;
  std::vector<data::Article> articles;  // main symbol filled in, no embedding
  std::vector<data::EmbeddingRecord> embeddings;
};

// Prices, articles and mentions come from one random stream and the embedding
// values from another, so corpora that differ only in signal strength share
// everything but the embeddings.
Corpus generate(const SynthConfig& config);

struct CorpusPaths {
  std::filesystem::path prices;
  std::filesystem::path news;
  std::filesystem::path embeddings;
  std::filesystem::path screener;
};

void write_corpus(const Corpus& corpus, const CorpusPaths& paths);

}  // namespace newsgraph::synthetic
