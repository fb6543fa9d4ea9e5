#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/data/prepared.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/model/encoders.hpp"

namespace newsgraph::graph {

enum class NodeKind { Company = 0, Article = 1, Industry = 2 };
enum class EdgeKind { ArticleMainCompany = 0, ArticleMentionedCompany = 1, CompanyIndustry = 2 };

inline constexpr std::size_t kNodeKinds = 3;
inline constexpr std::size_t kEdgeKinds = 3;

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);

struct NodeRef {
  NodeKind kind;
  std::string key;

  bool operator==(const NodeRef&) const = default;
  // Kind first, then key.
  bool operator<(const NodeRef& other) const;
};

struct Node {
  NodeRef ref;
  // Article: embedding. Company: window features, empty when the window is
  // incomplete. Industry: unused.
  std::vector<double> features;
  // Article only: trading days between the article and the target day (>= 1).
  std::size_t age = 0;
  // Company only, indexed by TargetMode.
  std::array<std::optional<int>, 2> labels;
};

// Undirected typed edge. For article edges `a` is the article and `b` the
// company; for industry edges `a` is the company and `b` the industry.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  EdgeKind kind = EdgeKind::ArticleMainCompany;
};

class Snapshot {
 public:
  Snapshot() = default;
  Snapshot(std::size_t target_day, std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t target_day() const { return target_day_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t count(NodeKind kind) const;

  std::optional<std::size_t> find(const NodeRef& ref) const;
  std::size_t index_of(const NodeRef& ref) const;  // throws DataError when absent

  // Neighbour node ids sorted by (kind, key).
  const std::vector<std::size_t>& neighbors(std::size_t id, EdgeKind kind) const;
  std::vector<NodeRef> neighbors(const NodeRef& ref, EdgeKind kind) const;

  // Company has a full feature window.
  bool complete(std::size_t id) const;
  std::optional<int> label(std::size_t id, labels::TargetMode mode) const;

  // Set by the builder: article references dropped for unknown symbols.
  std::size_t skipped_articles = 0;
  std::size_t skipped_mentions = 0;

  // One line per node: kind \t key \t edgekind:nodekind/key ...
  std::string debug_dump() const;

 private:
  std::size_t target_day_ = 0;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::array<std::vector<std::size_t>, kEdgeKinds>> adjacency_;
};

struct GraphConfig {
  bool industries = true;
  std::size_t window_days = 15;  // article window in trading days
  model::FeatureSpec features;
};

GraphConfig graph_config_for(data::Schema schema, const model::FeatureSpec& features);

// Companies first (by symbol), then articles (by id), then industries (by
// name). Articles are those keyed to the `window_days` trading days strictly
// before `day`.
Snapshot build_snapshot(std::size_t day, const data::PreparedDataset& dataset, const GraphConfig& config);

// Node i of the result is node order[i] of the input.
Snapshot permute(const Snapshot& snapshot, const std::vector<std::size_t>& order);
// Drops the listed nodes and their edges.
Snapshot remove_nodes(const Snapshot& snapshot, const std::vector<std::size_t>& ids);
// Hop distance from `source` over all edges; SIZE_MAX when unreachable.
std::vector<std::size_t> hop_distances(const Snapshot& snapshot, std::size_t source);

}  // namespace newsgraph::graph
