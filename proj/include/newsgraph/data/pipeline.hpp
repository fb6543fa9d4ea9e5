#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/data/embeddings.hpp"
#include "newsgraph/data/prepared.hpp"
#include "newsgraph/data/records.hpp"
#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/model/encoders.hpp"

namespace newsgraph::data {

struct SplitOptions {
  double train_fraction = 0.8627;  // 1100 of 1275 days
  std::optional<std::size_t> train_days;
  std::optional<std::size_t> test_days;
};

struct PrepareOptions {
  Schema schema = Schema::UsEquities;
  EmbeddingMode embedding_mode = EmbeddingMode::Title;
  // Embed articles with the hashing stub instead of an embedding file.
  bool stub_embedder = false;
  std::size_t stub_dim = 32;
  std::uint64_t stub_seed = 0;
  labels::LabelSpec significance;
  SplitOptions split;
  model::FeatureSpec features;
};

// ingest -> screener filter -> extract -> align -> embed -> label -> split.
// `embeddings` is ignored with the stub embedder and required otherwise.
PreparedDataset prepare(const Screener& screener, const std::vector<PriceSeries>& prices,
                        std::vector<Article> articles, const std::vector<EmbeddingRecord>* embeddings,
                        const PrepareOptions& options);

// Target days that have at least one company with a full feature window and a
// direction label.
std::vector<std::size_t> usable_days(const PreparedDataset& dataset, const model::FeatureSpec& features);

// Checks every train and test snapshot for look-ahead: every article strictly
// before the target day and inside the window, every window ending the day
// before. Throws DataError on a violation; returns a text summary otherwise.
std::string leakage_report(const PreparedDataset& dataset, const graph::GraphConfig& config);

std::string prepare_summary(const PreparedDataset& dataset);

}  // namespace newsgraph::data
