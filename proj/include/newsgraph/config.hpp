#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/data/embeddings.hpp"
#include "newsgraph/data/pipeline.hpp"
#include "newsgraph/data/prepared.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/model/gnn.hpp"
#include "newsgraph/synthetic.hpp"
#include "newsgraph/train/trainer.hpp"

namespace newsgraph {

struct Paths {
  std::filesystem::path prices = "data/prices.csv";
  std::filesystem::path news = "data/news.csv";
  std::filesystem::path embeddings = "data/embeddings.csv";
  std::filesystem::path screener = "data/screener.csv";
  std::filesystem::path output_dir = "out";
};

struct RunConfig {
  std::uint64_t seed = 7;
  data::Schema schema = data::Schema::UsEquities;
  bool stub_embedder = false;
  data::EmbeddingMode embedding_mode = data::EmbeddingMode::Title;
  std::size_t stub_dim = 32;
  Paths paths;
  std::vector<labels::TargetMode> modes{labels::TargetMode::Direction, labels::TargetMode::Significance};
  labels::LabelSpec significance{labels::TargetMode::Significance, 0.04, 100};
  data::SplitOptions split;
  model::ModelConfig model;  // article_dim comes from the prepared data
  train::TrainConfig train;
  std::size_t top_k = 100;
  bool top_k_per_company = false;
  synthetic::SynthConfig synth;

  data::PrepareOptions prepare_options() const;
  graph::GraphConfig graph_config() const;
};

// The full default configuration as JSON text.
std::string default_config_json();

// Defaults, then the file (if any), then each `key.path=value` override. The
// value is parsed as JSON when possible and taken as a string otherwise.
// Unknown keys and type mismatches throw ConfigError.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides = {});
RunConfig parse_run_config(std::string_view json_text, const std::vector<std::string>& overrides = {});

}  // namespace newsgraph
