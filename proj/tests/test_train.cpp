#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "newsgraph/data/pipeline.hpp"
#include "newsgraph/errors.hpp"
#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/synthetic.hpp"
#include "newsgraph/train/metrics.hpp"
#include "newsgraph/train/trainer.hpp"
#include "test_util.hpp"

using namespace newsgraph;
using namespace newsgraph::train;
using labels::TargetMode;

namespace {

EvalData eval_data(const std::vector<double>& probabilities, const std::vector<int>& labels) {
  EvalData d;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    d.predictions.push_back({i, "C" + std::to_string(i % 3), probabilities[i], labels[i]});
    d.mentions["C" + std::to_string(i % 3)];
  }
  return d;
}

data::PreparedDataset synthetic_dataset(double signal, double drift, std::size_t days = 80) {
  synthetic::SynthConfig sc;
  sc.companies = 6;
  sc.industries = 2;
  sc.days = days;
  sc.signal_strength = signal;
  sc.drift = drift;
  sc.seed = 21;
  const auto corpus = synthetic::generate(sc);
  data::PrepareOptions opts;
  opts.significance.lookback = 20;
  return data::prepare(corpus.screener, corpus.prices, corpus.articles, &corpus.embeddings, opts);
}

model::Model small_model(const data::PreparedDataset& ds, model::ModelKind kind, std::uint64_t seed = 5) {
  model::ModelConfig mc;
  mc.kind = kind;
  mc.node_dim = 16;
  mc.company_embedding = 4;
  mc.industry_embedding = 4;
  mc.lstm_hidden = 8;
  mc.article_dim = ds.embedding_dim;
  std::vector<std::string> companies, industries;
  for (const auto& c : ds.companies) {
    companies.push_back(c.symbol);
    if (std::find(industries.begin(), industries.end(), c.industry) == industries.end()) industries.push_back(c.industry);
  }
  std::sort(industries.begin(), industries.end());
  return model::Model(mc, companies, industries, seed);
}

std::vector<graph::Snapshot> snapshots(const data::PreparedDataset& ds, const std::vector<std::size_t>& days) {
  return build_snapshots(ds, days, graph::graph_config_for(ds.schema, model::FeatureSpec{}));
}

double mean_train_loss(model::Model& m, const std::vector<graph::Snapshot>& snaps) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : snaps) {
    num::Tape tape;
    if (const auto l = snapshot_loss(tape, m, s, TargetMode::Direction, model::Mode::Train)) {
      total += l->loss.value().item();
      ++n;
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST_CASE("z-test") {
  const auto large = z_test(0.53, 0.5, 56875);
  CHECK(std::abs(large.se - 0.00210) < 1e-5);
  CHECK(std::abs(large.z - 14.31) < 0.05);
  const auto neutral = z_test(0.5, 0.5, 1234);
  CHECK(neutral.z == 0.0);
  CHECK(neutral.p_value == doctest::Approx(0.5).epsilon(1e-12));
  const auto small = z_test(0.6, 0.5, 100);
  CHECK(small.se == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(small.z == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(small.p_value == doctest::Approx(1.0 - normal_cdf(2.0)).epsilon(1e-12));
  CHECK(std::abs(normal_cdf(1.645) - 0.95) < 1e-4);
  CHECK_THROWS(z_test(0.5, 0.0, 10));
  CHECK_THROWS(z_test(0.5, 1.0, 10));
  CHECK_THROWS(z_test(0.5, 0.5, 0));
}

TEST_CASE("confusion metrics") {
  const auto c = confusion_of({1, 1, 0, 0}, {1, 0, 0, 1});
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
  CHECK(c.fn == 1);
  const auto m = class_metrics(c);
  CHECK(*m.accuracy == 0.5);
  CHECK(*m.precision == 0.5);
  CHECK(*m.recall == 0.5);
  CHECK(*m.f1 == 0.5);

  const auto none = class_metrics(confusion_of({0, 0}, {0, 0}));
  CHECK(*none.accuracy == 1.0);
  CHECK_FALSE(none.precision);
  CHECK_FALSE(none.recall);
  CHECK_FALSE(none.f1);
  CHECK_FALSE(class_metrics(Confusion{}).accuracy);
}

TEST_CASE("evaluate and report") {
  SUBCASE("four predictions") {
    const auto r = evaluate(eval_data({0.9, 0.8, 0.2, 0.1}, {1, 0, 0, 1}), TargetMode::Direction, 4, false, "m");
    CHECK(r.samples == 4);
    CHECK(*r.metrics.f1 == 0.5);
    REQUIRE(r.z);
    CHECK(r.z->n == 4);
    // K equal to the sample count reproduces the global numbers.
    CHECK(r.top_k.used == 4);
    CHECK(r.top_k.accuracy == r.metrics.accuracy);
    CHECK(r.top_k.precision == r.metrics.precision);
  }
  SUBCASE("all correct") {
    const auto r = evaluate(eval_data({0.9, 0.3, 0.7, 0.1, 0.6}, {1, 0, 1, 0, 1}), TargetMode::Direction, 2, false, "m");
    CHECK(*r.metrics.accuracy == 1.0);
    CHECK(*r.metrics.precision == 1.0);
    CHECK(*r.metrics.recall == 1.0);
    CHECK(*r.metrics.f1 == 1.0);
    CHECK(r.z->z == doctest::Approx(0.5 / std::sqrt(0.25 / 5.0)).epsilon(1e-12));
  }
  SUBCASE("top-k keeps the most confident") {
    const auto r = evaluate(eval_data({0.55, 0.99, 0.45, 0.02}, {0, 1, 1, 0}), TargetMode::Direction, 2, false, "m");
    CHECK(r.top_k.used == 2);
    CHECK(*r.top_k.accuracy == 1.0);
    CHECK(*r.metrics.accuracy == 0.5);
  }
  SUBCASE("empty slices render as n/a") {
    const auto r = evaluate(eval_data({0.2, 0.3}, {0, 1}), TargetMode::Significance, 1, false, "m");
    CHECK_FALSE(r.metrics.precision);
    CHECK_FALSE(r.z);
    const auto text = render_text(r);
    CHECK(text.find("precision") != std::string::npos);
    CHECK(text.find("recall") != std::string::npos);
    CHECK(text.find("f1") != std::string::npos);
    CHECK(text.find("n/a") != std::string::npos);
    CHECK(render_delimited(r).find("precision\tn/a") != std::string::npos);
  }
  SUBCASE("delimited round trip") {
    auto data = eval_data({0.9, 0.8, 0.2, 0.1, 0.65, 0.35}, {1, 0, 0, 1, 1, 1});
    data.mentions["C0"] = {"a", "b"};
    data.skipped_unlabeled = 3;
    const auto r = evaluate(data, TargetMode::Direction, 3, true, "gnn-sage");
    const auto text = render_delimited(r);
    CHECK(render_delimited(parse_delimited(text)) == text);
    CHECK(render_text(r, true) == render_text(r, true));
    const auto back = parse_delimited(text);
    CHECK(back.companies.size() == 3);
    CHECK(back.companies[0].mentions == 2);
    CHECK(back.skipped_unlabeled == 3);
    CHECK_THROWS_AS(parse_delimited("# something else\n"), DataError);
  }
  SUBCASE("no predictions") {
    CHECK_THROWS_AS(evaluate(EvalData{}, TargetMode::Direction, 10, false, "m"), DataError);
  }
}

TEST_CASE("mention deciles") {
  std::vector<CompanyRow> rows;
  for (std::size_t i = 0; i < 20; ++i) {
    CompanyRow r;
    r.symbol = "S" + std::to_string(100 + i);
    r.mentions = 19 - i;
    r.samples = 19;
    r.correct = 19 - i;
    r.accuracy = static_cast<double>(19 - i) / 19.0;
    rows.push_back(r);
  }
  const auto d = mention_deciles(rows);
  CHECK(d.size == 2);
  CHECK(d.bottom == doctest::Approx((0.0 + 1.0) / 38.0));
  CHECK(d.top == doctest::Approx((18.0 + 19.0) / 38.0));
}

TEST_CASE("training loop") {
  const auto ds = synthetic_dataset(1.0, 0.0);
  const auto snaps = snapshots(ds, ds.train_days);
  REQUIRE(snaps.size() >= 20);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.seed = 9;

  SUBCASE("zero epochs leave the seeded initialisation") {
    test_util::TempDir dir("train0");
    auto trained = small_model(ds, model::ModelKind::Gnn);
    cfg.epochs = 0;
    const auto h = train::train(trained, snaps, TargetMode::Direction, cfg);
    CHECK(h.epochs.empty());
    model::save_checkpoint(dir / "a.ckpt", trained);
    model::save_checkpoint(dir / "b.ckpt", small_model(ds, model::ModelKind::Gnn));
    CHECK(test_util::read_file(dir / "a.ckpt") == test_util::read_file(dir / "b.ckpt"));
  }
  SUBCASE("step count per epoch") {
    for (std::size_t batch : {1u, 3u, 4u}) {
      auto m = small_model(ds, model::ModelKind::Baseline);
      cfg.epochs = 1;
      cfg.batch_size = batch;
      const auto h = train::train(m, snaps, TargetMode::Direction, cfg);
      CHECK(h.fit_snapshots + h.validation_snapshots == snaps.size());
      CHECK(h.validation_snapshots == static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(snaps.size()))));
      CHECK(h.epochs.at(0).steps == (h.fit_snapshots + batch - 1) / batch);
    }
  }
  SUBCASE("one epoch lowers the loss") {
    auto m = small_model(ds, model::ModelKind::Gnn);
    const double before = mean_train_loss(m, snaps);
    cfg.epochs = 1;
    train::train(m, snaps, TargetMode::Direction, cfg);
    CHECK(mean_train_loss(m, snaps) < before);
  }
  SUBCASE("deterministic given the seed") {
    test_util::TempDir dir("train_det");
    cfg.epochs = 2;
    std::vector<std::string> renders;
    for (const char* name : {"a.ckpt", "b.ckpt"}) {
      auto m = small_model(ds, model::ModelKind::Gnn);
      renders.push_back(render_history(train::train(m, snaps, TargetMode::Direction, cfg)));
      model::save_checkpoint(dir / name, m);
    }
    CHECK(renders[0] == renders[1]);
    CHECK(test_util::read_file(dir / "a.ckpt") == test_util::read_file(dir / "b.ckpt"));
  }
  SUBCASE("non-finite loss aborts with context") {
    auto m = small_model(ds, model::ModelKind::Gnn);
    auto& head = m.params()[m.params().index_of("head.bias")];
    head.value = num::Tensor(head.value.shape(), std::nan(""));
    cfg.epochs = 1;
    try {
      train::train(m, snaps, TargetMode::Direction, cfg);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
    }
  }
  SUBCASE("callback can stop early") {
    auto m = small_model(ds, model::ModelKind::Baseline);
    cfg.epochs = 10;
    std::size_t calls = 0;
    const auto h = train::train(m, snaps, TargetMode::Direction, cfg, [&](const EpochRecord& e) {
      ++calls;
      return e.epoch < 2;
    });
    CHECK(calls == 2);
    CHECK(h.epochs.size() == 2);
  }
  SUBCASE("empty split") {
    auto m = small_model(ds, model::ModelKind::Gnn);
    CHECK_THROWS_AS(train::train(m, {}, TargetMode::Direction, cfg), DataError);
  }
}

TEST_CASE("baseline picks up a price drift") {
  const auto ds = synthetic_dataset(0.0, 0.02, 120);
  auto m = small_model(ds, model::ModelKind::Baseline);
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 5;
  train::train(m, snapshots(ds, ds.train_days), TargetMode::Direction, cfg);
  const auto r = evaluate(collect_predictions(m, snapshots(ds, ds.test_days), TargetMode::Direction),
                          TargetMode::Direction, 100, false, "baseline");
  CHECK(*r.metrics.accuracy > 0.6);
}
