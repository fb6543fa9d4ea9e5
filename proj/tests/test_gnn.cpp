#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "newsgraph/errors.hpp"
#include "newsgraph/model/gnn.hpp"
#include "newsgraph/numerics/gradcheck.hpp"
#include "newsgraph/numerics/ops.hpp"
#include "test_util.hpp"

using namespace newsgraph;
using namespace newsgraph::model;
using graph::EdgeKind;
using graph::NodeKind;

namespace {

Tensor identity(std::size_t n) {
  Tensor t = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

graph::Node bare(NodeKind kind, std::string key) {
  graph::Node n;
  n.ref = {kind, std::move(key)};
  return n;
}

// Company X with articles p and q on main edges, plus an isolated company Y.
graph::Snapshot star_snapshot() {
  return graph::Snapshot(0,
                         {bare(NodeKind::Company, "X"), bare(NodeKind::Company, "Y"), bare(NodeKind::Article, "p"),
                          bare(NodeKind::Article, "q")},
                         {{2, 0, EdgeKind::ArticleMainCompany}, {3, 0, EdgeKind::ArticleMainCompany}});
}

Var bce_on_companies(Tape& tape, Model& model, const graph::Snapshot& snap, const std::vector<double>& targets) {
  const auto out = model.forward(tape, snap, Mode::Train);
  return num::bce_with_logits(out.logits, Tensor::column(targets));
}

void zero_parameter(Model& model, const std::string& name) {
  auto& p = model.params()[model.params().index_of(name)];
  p.value = Tensor(p.value.shape(), 0.0);
}

}  // namespace

TEST_CASE("sage layer hand-computed aggregation") {
  const auto snap = star_snapshot();
  const GraphIndex index(snap);
  ParameterStore store;
  SageLayerParams params{};
  for (std::size_t r = 0; r < relations().size(); ++r) params.relation[r] = store.add("rel" + std::to_string(r), identity(2));
  for (std::size_t k = 0; k < graph::kNodeKinds; ++k) {
    params.combine_weight[k] = store.add("w" + std::to_string(k), Tensor::from_rows({{1, 0}, {0, 1}, {1, 0}, {0, 1}}));
    params.combine_bias[k] = store.add("b" + std::to_string(k), Tensor::matrix(1, 2));
  }
  Tape tape;
  KindStates x;
  x[0] = tape.constant(Tensor::from_rows({{1, 0}, {-1, 3}}));
  x[1] = tape.constant(Tensor::from_rows({{0, 2}, {2, 0}}));
  const auto out = sage_layer(tape, store, params, index, x, {true, false, false});
  REQUIRE(out[0]);
  CHECK_FALSE(out[1]);
  const auto& y = out[0]->value();
  CHECK(y.at(0, 0) == 2.0);
  CHECK(y.at(0, 1) == 1.0);
  // Isolated: ReLU of the node's own state.
  CHECK(y.at(1, 0) == 0.0);
  CHECK(y.at(1, 1) == 3.0);
}

TEST_CASE("gat layer hand-computed attention") {
  const auto snap = star_snapshot();
  const GraphIndex index(snap);
  ParameterStore store;
  GatLayerParams params;
  params.weight = store.add("w", identity(2));
  params.attention_dst = store.add("ad", Tensor::column({1.0, 0.0}));
  params.attention_src = store.add("as", Tensor::column({0.0, 1.0}));
  Tape tape;
  KindStates x;
  x[0] = tape.constant(Tensor::from_rows({{1, 2}, {-1, 3}}));
  x[1] = tape.constant(Tensor::from_rows({{3, -1}, {0.5, 0.5}}));
  AttentionRecord record;
  const auto out = gat_layer(tape, store, params, snap, index, x, {true, false, false}, 0.2, &record);
  REQUIRE(out[0]);

  // Node X: self score lrelu(1 + 2) = 3, p: lrelu(1 - 1) = 0, q: lrelu(1 + 0.5).
  const double es = std::exp(3.0), ep = std::exp(0.0), eq = std::exp(1.5);
  const double sum = es + ep + eq;
  const double expect0 = std::max(0.0, (es * 1 + ep * 3 + eq * 0.5) / sum);
  const double expect1 = std::max(0.0, (es * 2 + ep * -1 + eq * 0.5) / sum);
  CHECK(out[0]->value().at(0, 0) == doctest::Approx(expect0).epsilon(1e-12));
  CHECK(out[0]->value().at(0, 1) == doctest::Approx(expect1).epsilon(1e-12));
  // Node Y attends to itself only.
  CHECK(out[0]->value().at(1, 0) == 0.0);
  CHECK(out[0]->value().at(1, 1) == doctest::Approx(3.0).epsilon(1e-12));

  REQUIRE(record.offsets.size() == 3);
  CHECK(record.dst == std::vector<std::size_t>{0, 1});
  CHECK(record.src == std::vector<std::size_t>{0, 2, 3, 1});
  CHECK(record.weights.value()[0] == doctest::Approx(es / sum).epsilon(1e-12));

  SUBCASE("zero attention vectors weight uniformly") {
    store[params.attention_dst].value = Tensor::column({0.0, 0.0});
    store[params.attention_src].value = Tensor::column({0.0, 0.0});
    Tape t2;
    KindStates x2;
    x2[0] = t2.constant(x[0]->value());
    x2[1] = t2.constant(x[1]->value());
    const auto u = gat_layer(t2, store, params, snap, index, x2, {true, false, false}, 0.2, nullptr);
    CHECK(u[0]->value().at(0, 0) == doctest::Approx((1 + 3 + 0.5) / 3.0).epsilon(1e-12));
    CHECK(u[0]->value().at(0, 1) == doctest::Approx((2 - 1 + 0.5) / 3.0).epsilon(1e-12));
  }
}

// A 1e-4 step: at 1e-5 roundoff dominates on the smallest LSTM coordinates.
TEST_CASE("end-to-end gradients match finite differences") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = graph::build_snapshot(20, ds, fixtures::toy_graph_config());
  REQUIRE(snap.count(NodeKind::Company) == 3);
  REQUIRE(snap.count(NodeKind::Article) == 2);
  REQUIRE(snap.count(NodeKind::Industry) == 2);
  for (LayerKind layer : {LayerKind::Sage, LayerKind::Gat}) {
    CAPTURE(to_string(layer));
    auto mc = fixtures::toy_model_config(3);
    mc.layer = layer;
    // Seed chosen so no ReLU is dead at these widths and every tensor gets gradient.
    Model model(mc, fixtures::symbols(ds), fixtures::industries(ds), 72);
    const auto checks = num::gradient_check_parameters(
        [&](Tape& tape) { return bce_on_companies(tape, model, snap, {1.0, 0.0, 1.0}); }, model.params(), 1e-4);
    REQUIRE(checks.size() == model.params().size());
    for (const auto& c : checks) {
      INFO(c.name);
      CHECK(c.max_rel_error < 1e-4);
      CHECK(c.max_abs_gradient > 0.0);
    }
  }
}

TEST_CASE("industry table receives gradient") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = graph::build_snapshot(20, ds, fixtures::toy_graph_config());
  Model model(fixtures::toy_model_config(3), fixtures::symbols(ds), fixtures::industries(ds), 2);
  Tape tape;
  const auto loss = bce_on_companies(tape, model, snap, {1.0, 0.0, 1.0});
  const auto grads = tape.backward(loss).parameters(model.params());
  const auto& g = grads[model.params().index_of("table.industry")];
  for (std::size_t row = 0; row < g.rows(); ++row) {
    double norm = 0.0;
    for (std::size_t c = 0; c < g.cols(); ++c) norm += std::abs(g.at(row, c));
    CHECK(norm > 0.0);
  }
}

TEST_CASE("degenerate parameters") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = graph::build_snapshot(20, ds, fixtures::toy_graph_config());
  Model model(fixtures::toy_model_config(3), fixtures::symbols(ds), fixtures::industries(ds), 2);
  CHECK(model.params()[model.params().index_of("proj.company")].value.rows() == 3 + 3);

  SUBCASE("zero head gives one half") {
    zero_parameter(model, "head.weight");
    zero_parameter(model, "head.bias");
    for (double p : model.predict(snap)) CHECK(p == 0.5);
  }
  SUBCASE("zero projections give zero layer-0 states") {
    for (const char* name : {"proj.company", "proj.article", "proj.industry"}) zero_parameter(model, name);
    Tape tape;
    const GraphIndex index(snap);
    const auto x = model.project_inputs(tape, snap, index, Mode::Eval);
    for (const auto& v : x) {
      REQUIRE(v);
      CHECK(v->cols() == 5);
      for (double e : v->value().values()) CHECK(e == 0.0);
    }
  }
}

TEST_CASE("permutation equivariance and locality on the toy graph") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = graph::build_snapshot(20, ds, fixtures::toy_graph_config());
  for (LayerKind layer : {LayerKind::Sage, LayerKind::Gat}) {
    auto mc = fixtures::toy_model_config(3);
    mc.layer = layer;
    Model model(mc, fixtures::symbols(ds), fixtures::industries(ds), 9);
    const auto base = model.predict(snap);

    std::vector<std::size_t> order(snap.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(order.begin(), order.end(), rng);
    const auto perm = graph::permute(snap, order);
    const auto p = model.predict(perm);
    std::size_t row = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm.node(i).ref.kind != NodeKind::Company) continue;
      const std::size_t old = snap.index_of(perm.node(i).ref);
      CHECK(std::abs(p[row] - base[old]) < 1e-12);
      ++row;
    }

    // Retail is five hops from BBB: removing it must not touch BBB.
    const std::size_t bbb = snap.index_of({NodeKind::Company, "BBB"});
    const auto removed = graph::remove_nodes(snap, {snap.index_of({NodeKind::Industry, "Retail"})});
    CHECK(model.predict(removed)[removed.index_of({NodeKind::Company, "BBB"})] == base[bbb]);
  }
}

TEST_CASE("baseline ignores the graph") {
  const auto ds = fixtures::toy_dataset();
  const auto snap = graph::build_snapshot(20, ds, fixtures::toy_graph_config());
  auto mc = fixtures::toy_model_config(3);
  mc.kind = ModelKind::Baseline;
  Model model(mc, fixtures::symbols(ds), fixtures::industries(ds), 4);
  for (const auto& p : model.params()) {
    CHECK((p.name.rfind("encoder.", 0) == 0 || p.name.rfind("head.", 0) == 0));
  }
  const auto without_news = graph::remove_nodes(snap, {snap.index_of({NodeKind::Article, "a1"}),
                                                       snap.index_of({NodeKind::Article, "a2"})});
  CHECK(model.predict(snap) == model.predict(without_news));
}

TEST_CASE("checkpoint round trip") {
  test_util::TempDir dir("ckpt");
  const auto ds = fixtures::toy_dataset();
  const auto snap = graph::build_snapshot(20, ds, fixtures::toy_graph_config());
  Model a(fixtures::toy_model_config(3), fixtures::symbols(ds), fixtures::industries(ds), 5);
  {
    // Move the batch-norm running statistics away from their defaults.
    Tape tape;
    a.forward(tape, snap, Mode::Train);
  }
  save_checkpoint(dir / "a.ckpt", a);
  Model b(fixtures::toy_model_config(3), fixtures::symbols(ds), fixtures::industries(ds), 6);
  CHECK(a.predict(snap) != b.predict(snap));
  load_checkpoint(dir / "a.ckpt", b);
  CHECK(a.predict(snap) == b.predict(snap));
  save_checkpoint(dir / "b.ckpt", b);
  CHECK(test_util::read_file(dir / "a.ckpt") == test_util::read_file(dir / "b.ckpt"));

  auto other = fixtures::toy_model_config(3);
  other.layer = LayerKind::Gat;
  Model c(other, fixtures::symbols(ds), fixtures::industries(ds), 5);
  CHECK(c.config_hash() != a.config_hash());
  CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt", c), ConfigError);
  Model d(fixtures::toy_model_config(3), {"AAA", "BBB"}, fixtures::industries(ds), 5);
  CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt", d), ConfigError);
}

TEST_CASE("model config validation") {
  auto mc = fixtures::toy_model_config(3);
  mc.layers = 0;
  CHECK_THROWS_AS(mc.validate(), ConfigError);
  mc = fixtures::toy_model_config(0);
  CHECK_THROWS_AS(mc.validate(), ConfigError);
  CHECK(parse_layer_kind("gat") == LayerKind::Gat);
  CHECK_THROWS_AS(parse_layer_kind("gcn"), ConfigError);
}
