#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "newsgraph/data/calendar.hpp"
#include "newsgraph/data/csv.hpp"
#include "newsgraph/data/embeddings.hpp"
#include "newsgraph/data/extract.hpp"
#include "newsgraph/data/pipeline.hpp"
#include "newsgraph/data/records.hpp"
#include "newsgraph/errors.hpp"
#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/synthetic.hpp"
#include "test_util.hpp"

using namespace newsgraph;
using namespace newsgraph::data;
using test_util::TempDir;
using test_util::write_file;

namespace {

Screener apple_microsoft() {
  return Screener({{"AAPL", "Apple Inc.", "Technology"}, {"MSFT", "Microsoft Corporation", "Technology"}});
}

Calendar weekdays(const char* first, std::size_t n) {
  std::vector<Date> days;
  for (Date d = parse_date(first); days.size() < n; d += std::chrono::days{1}) {
    if (!is_weekend(d)) days.push_back(d);
  }
  return Calendar(days);
}

Article article(std::string id, const char* date) {
  Article a;
  a.id = std::move(id);
  a.date = parse_date(date);
  a.title = "t";
  return a;
}

std::vector<std::size_t> iota_days(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("csv reader handles quoting and tracks lines") {
  std::istringstream in("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\r\nlast,\n");
  CsvReader reader(in, "t.csv");
  CsvRecord rec;
  REQUIRE(reader.next(rec));
  CHECK(rec.line == 1);
  REQUIRE(reader.next(rec));
  CHECK(rec.fields == std::vector<std::string>{"x,1", "say \"hi\""});
  REQUIRE(reader.next(rec));
  CHECK(rec.line == 3);
  CHECK(rec.fields == std::vector<std::string>{"multi\nline", "z"});
  REQUIRE(reader.next(rec));
  CHECK(rec.line == 5);
  CHECK(rec.fields == std::vector<std::string>{"last", ""});
  CHECK_FALSE(reader.next(rec));

  CHECK(csv_join({"plain", "with,comma", "with \"quote\""}) == "plain,\"with,comma\",\"with \"\"quote\"\"\"");
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3.0), "f", 1, "x") == 1.0 / 3.0);
}

TEST_CASE("malformed price line names file, line and field") {
  TempDir dir("prices");
  write_file(dir / "p.csv",
             "date,symbol,open,high,low,close,volume\n"
             "2016-01-04,AAPL,1,1,1,10,100\n"
             "2016-01-05,AAPL,1,1,1,abc,100\n");
  try {
    read_prices(dir / "p.csv");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 3);
    CHECK(e.field() == "close");
    CHECK(std::string(e.what()).find("p.csv:3") != std::string::npos);
  }
  write_file(dir / "q.csv", "date,symbol,open,high,low,close,volume\n2016-01-04,AAPL,1,1,1,0,100\n");
  CHECK_THROWS_AS(read_prices(dir / "q.csv"), DataError);
  write_file(dir / "r.csv", "symbol,date\n");
  CHECK_THROWS_AS(read_prices(dir / "r.csv"), DataError);
  write_file(dir / "s.csv",
             "date,symbol,open,high,low,close,volume\n2016-01-05,AAPL,1,1,1,2,1\n2016-01-04,AAPL,1,1,1,2,1\n");
  CHECK_THROWS_AS(read_prices(dir / "s.csv"), DataError);
}

TEST_CASE("file formats round-trip") {
  TempDir dir("formats");
  std::vector<Article> articles{article("n1", "2016-01-04"), article("n2", "2016-01-05")};
  articles[0].title = "Apple, \"quoted\"";
  articles[0].content = "two\nlines";
  articles[0].main_symbol = "AAPL";
  articles[0].mentioned_symbols = {"MSFT", "GOOG"};
  write_news(dir / "news.csv", articles);
  const auto back = read_news(dir / "news.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].title == articles[0].title);
  CHECK(back[0].content == "two lines");  // one record per physical line
  CHECK(back[0].mentioned_symbols == articles[0].mentioned_symbols);
  CHECK(back[1].main_symbol.empty());

  const std::vector<EmbeddingRecord> records{{"n1", {0.1, -2.5, 1e-300}, 0}, {"n2", {1.0 / 3.0, 0, 7}, 0}};
  write_embeddings(dir / "emb.csv", records);
  const auto emb = read_embeddings(dir / "emb.csv");
  REQUIRE(emb.size() == 2);
  CHECK(emb[0].values == records[0].values);
  CHECK(emb[1].values == records[1].values);

  write_file(dir / "bad.csv", "n1,3,1,2\n");
  CHECK_THROWS_AS(read_embeddings(dir / "bad.csv"), DataError);
  write_file(dir / "dup.csv",
             "id,date,title,content,main_symbol,mentioned_symbols\nn1,2016-01-04,a,,,\nn1,2016-01-05,b,,,\n");
  CHECK_THROWS_AS(read_news(dir / "dup.csv"), DataError);
  write_file(dir / "self.csv",
             "id,date,title,content,main_symbol,mentioned_symbols\nn1,2016-01-04,a,,AAPL,MSFT;AAPL\n");
  CHECK_THROWS_AS(read_news(dir / "self.csv"), DataError);
}

TEST_CASE("company extraction") {
  const CompanyMatcher matcher(apple_microsoft());
  SUBCASE("title main, rest mentioned") {
    const auto e = matcher.extract("Apple beats Microsoft estimates", "");
    REQUIRE(e);
    CHECK(e->main_symbol == "AAPL");
    CHECK(e->mentioned_symbols == std::vector<std::string>{"MSFT"});
  }
  SUBCASE("no match drops the article") { CHECK_FALSE(matcher.extract("Markets drift", "Nothing here")); }
  SUBCASE("word boundary") { CHECK_FALSE(matcher.extract("Applebee's expands", "")); }
  SUBCASE("content used when the title has no match") {
    const auto e = matcher.extract("Quiet day", "MSFT rose while Apple fell; MSFT again");
    REQUIRE(e);
    CHECK(e->main_symbol == "MSFT");
    CHECK(e->mentioned_symbols == std::vector<std::string>{"AAPL"});
  }
  SUBCASE("case sensitive") { CHECK_FALSE(matcher.extract("apple and microsoft", "")); }
  CHECK(normalize_company_name("Microsoft Corporation") == "Microsoft");
  CHECK(normalize_company_name("Acme Co.") == "Acme");
  CHECK_THROWS_AS(CompanyMatcher{Screener{}}, DataError);
}

TEST_CASE("date alignment") {
  const Calendar cal = weekdays("2016-01-04", 10);
  std::vector<Article> articles{article("sat", "2016-01-09"), article("mon", "2016-01-11"),
                                article("early", "2015-12-31"), article("late", "2016-02-01")};
  const auto aligned = align(articles, cal);
  REQUIRE(aligned.articles.size() == 2);
  CHECK(aligned.articles[0].article.id == "mon");
  CHECK(aligned.articles[1].article.id == "sat");
  for (const auto& a : aligned.articles) CHECK(format_date(cal[a.day]) == "2016-01-11");
  CHECK(aligned.dropped_before_calendar == 1);
  CHECK(aligned.dropped_after_calendar == 1);

  const auto none = align({article("a", "2015-01-01"), article("b", "2015-06-01")}, cal);
  CHECK(none.articles.empty());
  CHECK(none.dropped_before_calendar == 2);
  CHECK_THROWS_AS(parse_date("2016-1-4"), DataError);
  CHECK_THROWS_AS(parse_date("2016-02-30"), DataError);
}

TEST_CASE("chronological split") {
  const auto s = chronological_split(iota_days(1275), {1100, 175});
  CHECK(s.train.size() == 1100);
  CHECK(s.train.front() == 0);
  CHECK(s.train.back() == 1099);
  CHECK(s.test.front() == 1100);
  CHECK(s.test.back() == 1274);
  const auto small = chronological_split(iota_days(10), {8, 2});
  CHECK(small.train.size() == 8);
  CHECK(small.test == std::vector<std::size_t>{8, 9});
  CHECK_THROWS_AS(chronological_split(iota_days(10), {9, 2}), DataError);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    const std::size_t test = 1 + rng() % (n - 1);
    const std::size_t train = 1 + rng() % (n - test);
    const auto r = chronological_split(iota_days(n), {train, test});
    CHECK(r.train.size() == train);
    CHECK(r.test.size() == test);
    CHECK(r.train.back() < r.test.front());
  }
}

TEST_CASE("embedding attachment") {
  std::vector<Article> articles{article("a", "2016-01-04"), article("b", "2016-01-04")};
  SUBCASE("title vectors") {
    std::vector<EmbeddingRecord> recs{{"a", std::vector<double>(8, 1.0), 1}, {"b", std::vector<double>(8, 2.0), 2}};
    attach_embeddings(articles, recs, EmbeddingMode::Title);
    for (const auto& a : articles) CHECK(a.embedding.size() == 8);
  }
  SUBCASE("content mode averages sentence vectors") {
    std::vector<EmbeddingRecord> recs{
        {"a#0", {1, 0}, 1}, {"a#1", {0, 1}, 2}, {"a#2", {2, 2}, 3}, {"b", {5, 6}, 4}};
    attach_embeddings(articles, recs, EmbeddingMode::Content);
    CHECK(articles[0].embedding == std::vector<double>{1, 1});
    CHECK(articles[1].embedding == std::vector<double>{5, 6});
  }
  SUBCASE("errors") {
    auto copy = articles;
    CHECK_THROWS_AS(attach_embeddings(copy, {{"a", {1}, 1}, {"a", {2}, 2}, {"b", {3}, 3}}, EmbeddingMode::Title),
                    DataError);
    CHECK_THROWS_AS(attach_embeddings(copy, {{"a", {1, 2}, 1}, {"b", {3}, 2}}, EmbeddingMode::Title), DataError);
    try {
      attach_embeddings(copy, {{"a", {1}, 1}}, EmbeddingMode::Title);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
    CHECK_THROWS_AS(attach_embeddings(copy, {{"a#0", {1}, 1}, {"b", {3}, 2}}, EmbeddingMode::Title), DataError);
  }
  SUBCASE("stub embedder is deterministic and normalised") {
    const auto v = stub_embed("Apple beats estimates", 32, 9);
    CHECK(v == stub_embed("Apple beats estimates", 32, 9));
    CHECK(v != stub_embed("Apple beats estimates", 32, 10));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0));
    CHECK(stub_embed("", 4, 1) == std::vector<double>(4, 0.0));
    CHECK(split_sentences("One. Two! Three") == std::vector<std::string>{"One.", "Two!", "Three"});
  }
}

TEST_CASE("prepare pipeline") {
  synthetic::SynthConfig sc;
  sc.companies = 6;
  sc.industries = 2;
  sc.days = 120;
  sc.seed = 21;
  const auto corpus = synthetic::generate(sc);
  PrepareOptions opts;
  opts.significance.lookback = 30;

  const auto ds = prepare(corpus.screener, corpus.prices, corpus.articles, &corpus.embeddings, opts);
  CHECK(ds.companies.size() == 6);
  CHECK(ds.embedding_dim == sc.embedding_dim);
  REQUIRE_FALSE(ds.train_days.empty());
  REQUIRE_FALSE(ds.test_days.empty());
  CHECK(ds.train_days.back() < ds.test_days.front());
  for (const auto& a : ds.articles) CHECK(a.day < ds.calendar.size());

  SUBCASE("idempotent and byte-identical on disk") {
    TempDir dir("prepared");
    save_prepared(dir / "a.json", ds);
    const auto again = prepare(corpus.screener, corpus.prices, corpus.articles, &corpus.embeddings, opts);
    save_prepared(dir / "b.json", again);
    CHECK(test_util::read_file(dir / "a.json") == test_util::read_file(dir / "b.json"));
    save_prepared(dir / "c.json", load_prepared(dir / "a.json"));
    CHECK(test_util::read_file(dir / "a.json") == test_util::read_file(dir / "c.json"));
  }

  SUBCASE("leakage check passes and post-split articles reach test snapshots only") {
    const auto cfg = graph::graph_config_for(ds.schema, opts.features);
    CHECK(leakage_report(ds, cfg).rfind("leakage check: passed", 0) == 0);
    const std::size_t last_train = ds.train_days.back();
    std::set<std::string> late;
    for (const auto& a : ds.articles) {
      if (a.day >= last_train) late.insert(a.id);
    }
    REQUIRE_FALSE(late.empty());
    for (std::size_t d : ds.train_days) {
      const auto snap = graph::build_snapshot(d, ds, cfg);
      for (std::size_t i = 0; i < snap.size(); ++i) {
        if (snap.node(i).ref.kind == graph::NodeKind::Article) CHECK(late.count(snap.node(i).ref.key) == 0);
      }
    }
    std::set<std::string> seen;
    for (std::size_t d : ds.test_days) {
      const auto snap = graph::build_snapshot(d, ds, cfg);
      for (std::size_t i = 0; i < snap.size(); ++i) {
        if (snap.node(i).ref.kind == graph::NodeKind::Article) seen.insert(snap.node(i).ref.key);
      }
    }
    for (const auto& id : late) {
      const auto it = std::find_if(ds.articles.begin(), ds.articles.end(), [&](const auto& a) { return a.id == id; });
      if (it->day < ds.test_days.back()) CHECK(seen.count(id) == 1);
    }
  }

  SUBCASE("empty news gives news-free graphs") {
    const auto empty = prepare(corpus.screener, corpus.prices, {}, &corpus.embeddings, opts);
    CHECK(empty.articles.empty());
    const auto cfg = graph::graph_config_for(empty.schema, opts.features);
    for (std::size_t d : empty.test_days) CHECK(graph::build_snapshot(d, empty, cfg).count(graph::NodeKind::Article) == 0);
  }

  SUBCASE("unknown symbols are dropped and counted") {
    auto articles = corpus.articles;
    articles[0].main_symbol = "ZZZZ";
    articles[1].mentioned_symbols.push_back("QQQQ");
    const auto d2 = prepare(corpus.screener, corpus.prices, articles, &corpus.embeddings, opts);
    CHECK(d2.stats.articles_unknown_main == 1);
    CHECK(d2.stats.mentions_unknown == 1);
    CHECK(d2.articles.size() + 1 == ds.articles.size());
  }

  SUBCASE("stub embedder needs no file") {
    auto stub = opts;
    stub.stub_embedder = true;
    stub.stub_dim = 12;
    const auto d3 = prepare(corpus.screener, corpus.prices, corpus.articles, nullptr, stub);
    CHECK(d3.embedding_dim == 12);
  }

  SUBCASE("explicit day counts") {
    auto fixed = opts;
    fixed.split.train_days = 40;
    fixed.split.test_days = 10;
    const auto d4 = prepare(corpus.screener, corpus.prices, corpus.articles, &corpus.embeddings, fixed);
    CHECK(d4.train_days.size() == 40);
    CHECK(d4.test_days.size() == 10);
    CHECK(d4.test_days.back() == ds.test_days.back());
  }
}
