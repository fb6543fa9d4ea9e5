#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"
#include "fixtures.hpp"
#include "newsgraph/data/pipeline.hpp"
#include "newsgraph/errors.hpp"
#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/synthetic.hpp"

using namespace newsgraph;
using namespace newsgraph::graph;

namespace {

std::size_t id_of(const Snapshot& s, NodeKind kind, const std::string& key) { return s.index_of({kind, key}); }

// Every (a, b, kind) pair from the edge list, both directions.
std::set<std::tuple<std::size_t, std::size_t, EdgeKind>> edge_pairs(const Snapshot& s) {
  std::set<std::tuple<std::size_t, std::size_t, EdgeKind>> out;
  for (const auto& e : s.edges()) {
    out.emplace(e.a, e.b, e.kind);
    out.emplace(e.b, e.a, e.kind);
  }
  return out;
}

data::PreparedDataset synthetic_dataset(data::Schema schema) {
  synthetic::SynthConfig sc;
  sc.companies = 8;
  sc.industries = 3;
  sc.days = 90;
  sc.seed = 5;
  const auto corpus = synthetic::generate(sc);
  data::PrepareOptions opts;
  opts.schema = schema;
  opts.significance.lookback = 20;
  return data::prepare(corpus.screener, corpus.prices, corpus.articles, &corpus.embeddings, opts);
}

}  // namespace

TEST_CASE("toy snapshot construction") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = build_snapshot(20, ds, fixtures::toy_graph_config());
  CHECK(snap.size() == 7);
  CHECK(snap.count(NodeKind::Company) == 3);
  CHECK(snap.count(NodeKind::Article) == 2);
  CHECK(snap.count(NodeKind::Industry) == 2);
  std::size_t industry_edges = 0;
  for (const auto& e : snap.edges()) industry_edges += e.kind == EdgeKind::CompanyIndustry ? 1 : 0;
  CHECK(industry_edges == 3);

  const NodeRef a{NodeKind::Company, "AAA"};
  CHECK(snap.neighbors(a, EdgeKind::ArticleMainCompany) == std::vector<NodeRef>{{NodeKind::Article, "a1"}});
  CHECK(snap.neighbors(a, EdgeKind::ArticleMentionedCompany) == std::vector<NodeRef>{{NodeKind::Article, "a2"}});
  CHECK(snap.neighbors({NodeKind::Article, "a1"}, EdgeKind::ArticleMentionedCompany) ==
        std::vector<NodeRef>{{NodeKind::Company, "BBB"}});
  CHECK(snap.node(id_of(snap, NodeKind::Article, "a1")).age == 2);
  CHECK(snap.node(id_of(snap, NodeKind::Article, "a2")).age == 1);
  CHECK_THROWS_AS(snap.neighbors(NodeRef{NodeKind::Company, "ZZZ"}, EdgeKind::ArticleMainCompany), DataError);

  CHECK(snap.debug_dump() ==
        "company\tAAA\tmain:article/a1\tmentioned:article/a2\tindustry:industry/Energy\n"
        "company\tBBB\tmentioned:article/a1\tindustry:industry/Energy\n"
        "company\tCCC\tmain:article/a2\tindustry:industry/Retail\n"
        "article\ta1\tmain:company/AAA\tmentioned:company/BBB\n"
        "article\ta2\tmain:company/CCC\tmentioned:company/AAA\n"
        "industry\tEnergy\tindustry:company/AAA\tindustry:company/BBB\n"
        "industry\tRetail\tindustry:company/CCC\n");
  CHECK(build_snapshot(20, ds, fixtures::toy_graph_config()).debug_dump() == snap.debug_dump());
}

TEST_CASE("empty news window and isolated company") {
  const auto ds = fixtures::tiny_dataset({{"AAA", "Alpha", "Energy"}, {"BBB", "Beta", ""}}, 25, {}, 3);
  const auto snap = build_snapshot(20, ds, fixtures::toy_graph_config());
  CHECK(snap.count(NodeKind::Article) == 0);
  CHECK(snap.count(NodeKind::Industry) == 1);
  for (const auto& e : snap.edges()) CHECK(e.kind == EdgeKind::CompanyIndustry);
  const std::size_t b = id_of(snap, NodeKind::Company, "BBB");
  for (std::size_t k = 0; k < kEdgeKinds; ++k) CHECK(snap.neighbors(b, static_cast<EdgeKind>(k)).empty());
}

TEST_CASE("window boundaries, completeness and unknown symbols") {
  const auto ds = fixtures::tiny_dataset({{"AAA", "Alpha", "Energy"}, {"BBB", "Beta", "Energy"}}, 40,
                                         {{"old", 4, "AAA", {}},
                                          {"first", 5, "AAA", {}},
                                          {"last", 19, "BBB", {"AAA", "ZZZ"}},
                                          {"today", 20, "AAA", {}},
                                          {"ghost", 19, "ZZZ", {}}},
                                         3);
  const auto snap = build_snapshot(20, ds, fixtures::toy_graph_config());
  CHECK_FALSE(snap.find({NodeKind::Article, "old"}));
  CHECK(snap.find({NodeKind::Article, "first"}));
  CHECK(snap.find({NodeKind::Article, "last"}));
  CHECK_FALSE(snap.find({NodeKind::Article, "today"}));
  CHECK_FALSE(snap.find({NodeKind::Article, "ghost"}));
  CHECK(snap.skipped_articles == 1);
  CHECK(snap.skipped_mentions == 1);

  // Day 3 has only three prior closes, short of the four-step window.
  const auto early = build_snapshot(3, ds, fixtures::toy_graph_config());
  CHECK_FALSE(early.complete(0));
  CHECK(early.node(0).features.empty());
  CHECK(build_snapshot(4, ds, fixtures::toy_graph_config()).complete(0));
}

TEST_CASE("synthetic snapshots: symmetry, main edges, no look-ahead") {
  const auto ds = synthetic_dataset(data::Schema::UsEquities);
  const auto cfg = graph_config_for(ds.schema, model::FeatureSpec{});
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t day = 16 + rng() % (ds.calendar.size() - 16);
    const auto snap = build_snapshot(day, ds, cfg);
    const auto pairs = edge_pairs(snap);
    std::size_t adjacency_entries = 0;
    for (std::size_t i = 0; i < snap.size(); ++i) {
      for (std::size_t k = 0; k < kEdgeKinds; ++k) {
        const auto kind = static_cast<EdgeKind>(k);
        const auto& nb = snap.neighbors(i, kind);
        adjacency_entries += nb.size();
        for (std::size_t j : nb) {
          CHECK(pairs.count({i, j, kind}) == 1);
          const auto& back = snap.neighbors(j, kind);
          CHECK(std::find(back.begin(), back.end(), i) != back.end());
        }
        CHECK(std::is_sorted(nb.begin(), nb.end(),
                             [&](std::size_t x, std::size_t y) { return snap.node(x).ref < snap.node(y).ref; }));
      }
    }
    CHECK(adjacency_entries == pairs.size());

    std::size_t main_edges = 0, in_window = 0;
    for (const auto& e : snap.edges()) main_edges += e.kind == EdgeKind::ArticleMainCompany ? 1 : 0;
    for (const auto& a : ds.articles) in_window += (a.day < day && a.day + 15 >= day) ? 1 : 0;
    CHECK(main_edges == in_window);
    for (const auto& n : snap.nodes()) {
      if (n.ref.kind == NodeKind::Article) {
        CHECK(n.age >= 1);
        CHECK(n.age <= 15);
      }
    }
  }
}

TEST_CASE("bloomberg schema has no industry nodes") {
  const auto ds = synthetic_dataset(data::Schema::Bloomberg);
  const auto cfg = graph_config_for(ds.schema, model::FeatureSpec{});
  CHECK_FALSE(cfg.industries);
  for (std::size_t d : ds.test_days) {
    const auto snap = build_snapshot(d, ds, cfg);
    CHECK(snap.count(NodeKind::Industry) == 0);
  }
}

TEST_CASE("permute, remove and hop distances") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = build_snapshot(20, ds, fixtures::toy_graph_config());
  std::vector<std::size_t> order(snap.size());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  const auto p = permute(snap, order);
  CHECK(p.node(0).ref == snap.node(6).ref);
  CHECK(p.debug_dump() != snap.debug_dump());
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const auto& ref = snap.node(i).ref;
    for (std::size_t k = 0; k < kEdgeKinds; ++k) {
      CHECK(p.neighbors(ref, static_cast<EdgeKind>(k)) == snap.neighbors(ref, static_cast<EdgeKind>(k)));
    }
  }
  CHECK_THROWS_AS(permute(snap, {0, 0, 1, 2, 3, 4, 5}), DataError);

  const auto d = hop_distances(snap, id_of(snap, NodeKind::Company, "BBB"));
  CHECK(d[id_of(snap, NodeKind::Article, "a1")] == 1);
  CHECK(d[id_of(snap, NodeKind::Company, "AAA")] == 2);
  CHECK(d[id_of(snap, NodeKind::Industry, "Retail")] == 5);

  const auto r = remove_nodes(snap, {id_of(snap, NodeKind::Article, "a2")});
  CHECK(r.size() == 6);
  CHECK(r.neighbors(NodeRef{NodeKind::Company, "CCC"}, EdgeKind::ArticleMainCompany).empty());
  CHECK(r.neighbors(NodeRef{NodeKind::Company, "AAA"}, EdgeKind::ArticleMainCompany).size() == 1);
}
