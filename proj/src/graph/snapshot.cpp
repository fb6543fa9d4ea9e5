#include "newsgraph/graph/snapshot.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "newsgraph/errors.hpp"

namespace newsgraph::graph {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Company: return "company";
    case NodeKind::Article: return "article";
    case NodeKind::Industry: return "industry";
  }
  return "company";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::ArticleMainCompany: return "main";
    case EdgeKind::ArticleMentionedCompany: return "mentioned";
    case EdgeKind::CompanyIndustry: return "industry";
  }
  return "main";
}

bool NodeRef::operator<(const NodeRef& other) const {
  return std::tie(kind, key) < std::tie(other.kind, other.key);
}

Snapshot::Snapshot(std::size_t target_day, std::vector<Node> nodes, std::vector<Edge> edges)
    : target_day_(target_day), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::set<NodeRef> refs;
  for (const auto& n : nodes_) {
    if (!refs.insert(n.ref).second) {
      throw DataError("snapshot: duplicate node " + std::string(to_string(n.ref.kind)) + "/" + n.ref.key);
    }
  }
  adjacency_.resize(nodes_.size());
  std::set<std::tuple<int, std::size_t, std::size_t>> seen;
  for (const auto& e : edges_) {
    if (e.a >= nodes_.size() || e.b >= nodes_.size()) throw DataError("snapshot: edge endpoint out of range");
    const bool article_edge = e.kind != EdgeKind::CompanyIndustry;
    const NodeKind ka = article_edge ? NodeKind::Article : NodeKind::Company;
    const NodeKind kb = article_edge ? NodeKind::Company : NodeKind::Industry;
    if (nodes_[e.a].ref.kind != ka || nodes_[e.b].ref.kind != kb) {
      throw DataError("snapshot: " + std::string(to_string(e.kind)) + " edge joins the wrong node kinds");
    }
    if (!seen.emplace(static_cast<int>(e.kind), e.a, e.b).second) {
      throw DataError("snapshot: duplicate " + std::string(to_string(e.kind)) + " edge " + nodes_[e.a].ref.key +
                      " - " + nodes_[e.b].ref.key);
    }
    adjacency_[e.a][static_cast<std::size_t>(e.kind)].push_back(e.b);
    adjacency_[e.b][static_cast<std::size_t>(e.kind)].push_back(e.a);
  }
  for (auto& per_kind : adjacency_) {
    for (auto& list : per_kind) {
      std::sort(list.begin(), list.end(),
                [this](std::size_t x, std::size_t y) { return nodes_[x].ref < nodes_[y].ref; });
    }
  }
}

std::size_t Snapshot::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const Node& n) { return n.ref.kind == kind; }));
}

std::optional<std::size_t> Snapshot::find(const NodeRef& ref) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].ref == ref) return i;
  }
  return std::nullopt;
}

std::size_t Snapshot::index_of(const NodeRef& ref) const {
  const auto id = find(ref);
  if (!id) throw DataError("snapshot: unknown node " + std::string(to_string(ref.kind)) + "/" + ref.key);
  return *id;
}

const std::vector<std::size_t>& Snapshot::neighbors(std::size_t id, EdgeKind kind) const {
  if (id >= nodes_.size()) throw DataError("snapshot: node id " + std::to_string(id) + " out of range");
  return adjacency_[id][static_cast<std::size_t>(kind)];
}

std::vector<NodeRef> Snapshot::neighbors(const NodeRef& ref, EdgeKind kind) const {
  std::vector<NodeRef> out;
  for (std::size_t n : neighbors(index_of(ref), kind)) out.push_back(nodes_[n].ref);
  return out;
}

bool Snapshot::complete(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.ref.kind == NodeKind::Company && !n.features.empty();
}

std::optional<int> Snapshot::label(std::size_t id, labels::TargetMode mode) const {
  return nodes_.at(id).labels[static_cast<std::size_t>(mode)];
}

std::string Snapshot::debug_dump() const {
  std::string out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out += to_string(nodes_[i].ref.kind);
    out += '\t';
    out += nodes_[i].ref.key;
    for (std::size_t k = 0; k < kEdgeKinds; ++k) {
      for (std::size_t n : adjacency_[i][k]) {
        out += '\t';
        out += to_string(static_cast<EdgeKind>(k));
        out += ':';
        out += to_string(nodes_[n].ref.kind);
        out += '/';
        out += nodes_[n].ref.key;
      }
    }
    out += '\n';
  }
  return out;
}

GraphConfig graph_config_for(data::Schema schema, const model::FeatureSpec& features) {
  GraphConfig cfg;
  cfg.industries = schema == data::Schema::UsEquities;
  cfg.window_days = features.steps;
  cfg.features = features;
  return cfg;
}

Snapshot build_snapshot(std::size_t day, const data::PreparedDataset& ds, const GraphConfig& config) {
  if (ds.companies.empty()) throw DataError("build_snapshot: empty universe");
  if (day >= ds.calendar.size()) throw DataError("build_snapshot: day " + std::to_string(day) + " outside calendar");

  std::vector<Node> nodes;
  std::map<std::string, std::size_t> company_id;
  for (std::size_t c = 0; c < ds.companies.size(); ++c) {
    Node n;
    n.ref = {NodeKind::Company, ds.companies[c].symbol};
    const std::span<const double> history(ds.closes[c].data(), day);
    if (auto w = model::window_features(history, config.features)) n.features = std::move(*w);
    n.labels[0] = ds.label(labels::TargetMode::Direction, c, day);
    n.labels[1] = ds.label(labels::TargetMode::Significance, c, day);
    company_id.emplace(n.ref.key, nodes.size());
    nodes.push_back(std::move(n));
  }

  const std::size_t first_day = day >= config.window_days ? day - config.window_days : 0;
  const auto lo = std::lower_bound(ds.articles.begin(), ds.articles.end(), first_day,
                                   [](const data::PreparedArticle& a, std::size_t d) { return a.day < d; });
  const auto hi = std::lower_bound(lo, ds.articles.end(), day,
                                   [](const data::PreparedArticle& a, std::size_t d) { return a.day < d; });
  std::vector<const data::PreparedArticle*> window;
  for (auto it = lo; it != hi; ++it) window.push_back(&*it);
  std::sort(window.begin(), window.end(), [](const auto* x, const auto* y) { return x->id < y->id; });

  std::vector<Edge> edges;
  std::size_t skipped_articles = 0, skipped_mentions = 0;
  for (const auto* a : window) {
    const auto main = company_id.find(a->main_symbol);
    if (main == company_id.end()) {
      ++skipped_articles;
      continue;
    }
    if (a->embedding.size() != ds.embedding_dim || a->embedding.empty()) {
      throw DataError("build_snapshot: article '" + a->id + "' has embedding dim " +
                      std::to_string(a->embedding.size()) + ", expected " + std::to_string(ds.embedding_dim));
    }
    const std::size_t id = nodes.size();
    Node n;
    n.ref = {NodeKind::Article, a->id};
    n.features = a->embedding;
    n.age = day - a->day;
    nodes.push_back(std::move(n));
    edges.push_back({id, main->second, EdgeKind::ArticleMainCompany});
    std::set<std::size_t> linked{main->second};
    for (const auto& s : a->mentioned_symbols) {
      const auto m = company_id.find(s);
      if (m == company_id.end()) {
        ++skipped_mentions;
        continue;
      }
      if (linked.insert(m->second).second) edges.push_back({id, m->second, EdgeKind::ArticleMentionedCompany});
    }
  }

  if (config.industries) {
    std::map<std::string, std::size_t> industry_id;
    for (const auto& c : ds.companies) {
      if (!c.industry.empty()) industry_id.emplace(c.industry, 0);
    }
    for (auto& [name, id] : industry_id) {
      id = nodes.size();
      Node n;
      n.ref = {NodeKind::Industry, name};
      nodes.push_back(std::move(n));
    }
    for (std::size_t c = 0; c < ds.companies.size(); ++c) {
      if (!ds.companies[c].industry.empty()) {
        edges.push_back({c, industry_id.at(ds.companies[c].industry), EdgeKind::CompanyIndustry});
      }
    }
  }

  Snapshot snap(day, std::move(nodes), std::move(edges));
  snap.skipped_articles = skipped_articles;
  snap.skipped_mentions = skipped_mentions;
  return snap;
}

Snapshot permute(const Snapshot& s, const std::vector<std::size_t>& order) {
  if (order.size() != s.size()) throw DataError("permute: order length mismatch");
  std::vector<std::size_t> new_id(s.size(), std::numeric_limits<std::size_t>::max());
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] >= s.size() || new_id[order[i]] != std::numeric_limits<std::size_t>::max()) {
      throw DataError("permute: not a permutation");
    }
    new_id[order[i]] = i;
    nodes.push_back(s.node(order[i]));
  }
  std::vector<Edge> edges;
  for (const auto& e : s.edges()) edges.push_back({new_id[e.a], new_id[e.b], e.kind});
  Snapshot out(s.target_day(), std::move(nodes), std::move(edges));
  out.skipped_articles = s.skipped_articles;
  out.skipped_mentions = s.skipped_mentions;
  return out;
}

Snapshot remove_nodes(const Snapshot& s, const std::vector<std::size_t>& ids) {
  const std::set<std::size_t> drop(ids.begin(), ids.end());
  std::vector<std::size_t> new_id(s.size(), std::numeric_limits<std::size_t>::max());
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (drop.count(i) != 0) continue;
    new_id[i] = nodes.size();
    nodes.push_back(s.node(i));
  }
  std::vector<Edge> edges;
  for (const auto& e : s.edges()) {
    if (drop.count(e.a) == 0 && drop.count(e.b) == 0) edges.push_back({new_id[e.a], new_id[e.b], e.kind});
  }
  Snapshot out(s.target_day(), std::move(nodes), std::move(edges));
  out.skipped_articles = s.skipped_articles;
  out.skipped_mentions = s.skipped_mentions;
  return out;
}

std::vector<std::size_t> hop_distances(const Snapshot& s, std::size_t source) {
  std::vector<std::size_t> dist(s.size(), std::numeric_limits<std::size_t>::max());
  std::deque<std::size_t> queue{source};
  dist.at(source) = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t k = 0; k < kEdgeKinds; ++k) {
      for (std::size_t v : s.neighbors(u, static_cast<EdgeKind>(k))) {
        if (dist[v] == std::numeric_limits<std::size_t>::max()) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

}  // namespace newsgraph::graph
