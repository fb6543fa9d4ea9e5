#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/data/calendar.hpp"
#include "newsgraph/data/records.hpp"

namespace newsgraph::data {

enum class EmbeddingMode { Title, Content };

EmbeddingMode parse_embedding_mode(std::string_view text);
std::string_view to_string(EmbeddingMode mode);

// Title mode: one record per article id. Content mode: either one record keyed
// by the id or sentence records keyed `id#0`, `id#1`, ... which are averaged.
// Missing ids, duplicate ids and mixed dimensions are errors. Records for
// unknown ids are ignored.
void attach_embeddings(std::vector<Article>& articles, const std::vector<EmbeddingRecord>& records,
                       EmbeddingMode mode);

// Deterministic stand-in for a text encoder: signed feature hashing of
// lower-cased word unigrams and bigrams, L2-normalised. Empty text gives zeros.
std::vector<double> stub_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

std::vector<std::string> split_sentences(std::string_view text);

// Title mode embeds the title; content mode averages the sentence embeddings of
// the content.
std::vector<double> stub_embed_article(const Article& article, EmbeddingMode mode, std::size_t dim,
                                       std::uint64_t seed);

struct AlignedArticle {
  Article article;
  std::size_t day = 0;  // calendar index
};

struct Alignment {
  std::vector<AlignedArticle> articles;  // sorted by (day, id)
  std::size_t dropped_before_calendar = 0;
  std::size_t dropped_after_calendar = 0;
};

// Keys each article to the first trading day on or after its date. Articles
// dated before the first or after the last trading day are dropped.
Alignment align(std::vector<Article> articles, const Calendar& calendar);

}  // namespace newsgraph::data
