#include "newsgraph/data/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "newsgraph/errors.hpp"

namespace newsgraph::data {

namespace {

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

EmbeddingMode parse_embedding_mode(std::string_view text) {
  if (text == "title") return EmbeddingMode::Title;
  if (text == "content") return EmbeddingMode::Content;
  throw ConfigError("unknown embedding mode '" + std::string(text) + "' (expected title or content)");
}

std::string_view to_string(EmbeddingMode mode) {
  return mode == EmbeddingMode::Title ? "title" : "content";
}

void attach_embeddings(std::vector<Article>& articles, const std::vector<EmbeddingRecord>& records,
                       EmbeddingMode mode) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < articles.size(); ++i) index.emplace(articles[i].id, i);

  std::set<std::string> seen;
  std::vector<std::vector<const EmbeddingRecord*>> whole(articles.size()), sentences(articles.size());
  std::size_t dim = 0;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw DataError("embeddings: duplicate id '" + r.id + "' (line " + std::to_string(r.line) + ")");
    }
    if (dim == 0) dim = r.values.size();
    if (r.values.size() != dim) {
      throw DataError("embeddings: id '" + r.id + "' has dim " + std::to_string(r.values.size()) +
                      ", expected " + std::to_string(dim));
    }
    const std::size_t hash = r.id.find('#');
    const std::string base = r.id.substr(0, hash);
    const auto it = index.find(base);
    if (it == index.end()) continue;
    if (hash == std::string::npos) {
      whole[it->second].push_back(&r);
    } else {
      if (mode == EmbeddingMode::Title) {
        throw DataError("embeddings: sentence record '" + r.id + "' is only valid in content mode");
      }
      sentences[it->second].push_back(&r);
    }
  }

  std::vector<std::string> missing;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (whole[i].empty() && sentences[i].empty()) missing.push_back(articles[i].id);
    if (!whole[i].empty() && !sentences[i].empty()) {
      throw DataError("embeddings: article '" + articles[i].id +
                      "' has both a whole record and sentence records");
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ...";
    throw DataError("embeddings: " + std::to_string(missing.size()) + " article id(s) missing: " + list);
  }

  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (!whole[i].empty()) {
      articles[i].embedding = whole[i].front()->values;
      continue;
    }
    std::vector<double> mean(dim, 0.0);
    for (const auto* r : sentences[i]) {
      for (std::size_t d = 0; d < dim; ++d) mean[d] += r->values[d];
    }
    for (double& v : mean) v /= static_cast<double>(sentences[i].size());
    articles[i].embedding = std::move(mean);
  }
}

std::vector<double> stub_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("stub embedding dim must be positive");
  std::vector<double> v(dim, 0.0);
  const auto tokens = tokenize(text);
  auto add_feature = [&](std::string_view feature) {
    const std::uint64_t h = fnv1a(feature, seed);
    v[h % dim] += (h >> 63) != 0 ? 1.0 : -1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_feature(tokens[i]);
    if (i + 1 < tokens.size()) add_feature(tokens[i] + " " + tokens[i + 1]);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    const auto first = current.find_first_not_of(" \t\r\n");
    if (first != std::string::npos) out.push_back(current.substr(first));
    current.clear();
  };
  for (char c : text) {
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') flush();
  }
  flush();
  return out;
}

std::vector<double> stub_embed_article(const Article& article, EmbeddingMode mode, std::size_t dim,
                                       std::uint64_t seed) {
  if (mode == EmbeddingMode::Title) return stub_embed(article.title, dim, seed);
  const auto sentences = split_sentences(article.content);
  std::vector<double> mean(dim, 0.0);
  if (sentences.empty()) return mean;
  for (const auto& s : sentences) {
    const auto v = stub_embed(s, dim, seed);
    for (std::size_t d = 0; d < dim; ++d) mean[d] += v[d];
  }
  for (double& x : mean) x /= static_cast<double>(sentences.size());
  return mean;
}

Alignment align(std::vector<Article> articles, const Calendar& calendar) {
  Alignment out;
  for (auto& a : articles) {
    if (calendar.empty() || a.date < calendar[0]) {
      ++out.dropped_before_calendar;
      continue;
    }
    const auto day = calendar.first_on_or_after(a.date);
    if (!day) {
      ++out.dropped_after_calendar;
      continue;
    }
    out.articles.push_back({std::move(a), *day});
  }
  std::sort(out.articles.begin(), out.articles.end(), [](const auto& x, const auto& y) {
    return x.day != y.day ? x.day < y.day : x.article.id < y.article.id;
  });
  return out;
}

}  // namespace newsgraph::data
