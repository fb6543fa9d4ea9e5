#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "newsgraph/errors.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/synthetic.hpp"
#include "test_util.hpp"

using namespace newsgraph;
using namespace newsgraph::synthetic;

namespace {

struct Sample {
  std::vector<double> x;
  double y = 0.0;
};

// Articles paired with their main company's move from t + shift - 1 to t + shift.
std::vector<Sample> probe_samples(const Corpus& corpus, std::size_t shift) {
  std::map<data::Date, std::size_t> day;
  for (const auto& bar : corpus.prices[0].bars) day.emplace(bar.date, day.size());
  std::map<std::string, std::size_t> company;
  for (const auto& s : corpus.prices) company.emplace(s.symbol, company.size());
  std::vector<Sample> out;
  for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
    const auto& a = corpus.articles[i];
    const std::size_t t = day.at(a.date) + shift;
    const auto& bars = corpus.prices[company.at(a.main_symbol)].bars;
    if (t >= bars.size()) continue;
    out.push_back({corpus.embeddings[i].values, bars[t].close > bars[t - 1].close ? 1.0 : 0.0});
  }
  return out;
}

// Logistic regression by full-batch gradient descent; held-out accuracy.
double probe_accuracy(const std::vector<Sample>& samples, std::size_t train) {
  const std::size_t dim = samples.front().x.size();
  std::vector<double> w(dim + 1, 0.0);
  auto score = [&](const Sample& s) {
    double z = w[dim];
    for (std::size_t d = 0; d < dim; ++d) z += w[d] * s.x[d];
    return z;
  };
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<double> g(dim + 1, 0.0);
    for (std::size_t i = 0; i < train; ++i) {
      const double r = 1.0 / (1.0 + std::exp(-score(samples[i]))) - samples[i].y;
      for (std::size_t d = 0; d < dim; ++d) g[d] += r * samples[i].x[d];
      g[dim] += r;
    }
    for (std::size_t d = 0; d <= dim; ++d) w[d] -= 0.5 * g[d] / static_cast<double>(train);
  }
  std::size_t correct = 0;
  for (std::size_t i = train; i < samples.size(); ++i) correct += (score(samples[i]) > 0.0) == (samples[i].y > 0.5);
  return static_cast<double>(correct) / static_cast<double>(samples.size() - train);
}

SynthConfig probe_config(double s) {
  SynthConfig c;
  c.companies = 20;
  c.days = 200;
  c.signal_strength = s;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("same seed writes byte-identical corpora") {
  test_util::TempDir dir("synth");
  SynthConfig cfg;
  cfg.companies = 6;
  cfg.industries = 2;
  cfg.days = 30;
  auto write = [&](const std::string& tag) {
    const CorpusPaths p{dir / (tag + "_prices.csv"), dir / (tag + "_news.csv"), dir / (tag + "_emb.csv"),
                        dir / (tag + "_screener.csv")};
    write_corpus(generate(cfg), p);
    return test_util::read_file(p.prices) + test_util::read_file(p.news) + test_util::read_file(p.embeddings) +
           test_util::read_file(p.screener);
  };
  const auto a = write("a");
  CHECK(a == write("b"));
  cfg.seed += 1;
  CHECK(a != write("c"));
}

TEST_CASE("signal strength changes only the embeddings") {
  const auto noise = generate(probe_config(0.0));
  const auto signal = generate(probe_config(1.0));
  REQUIRE(noise.articles.size() == signal.articles.size());
  for (std::size_t i = 0; i < noise.articles.size(); ++i) {
    CHECK(noise.articles[i].id == signal.articles[i].id);
    CHECK(noise.articles[i].main_symbol == signal.articles[i].main_symbol);
    CHECK(noise.articles[i].mentioned_symbols == signal.articles[i].mentioned_symbols);
  }
  for (std::size_t c = 0; c < noise.prices.size(); ++c) {
    for (std::size_t t = 0; t < noise.prices[c].bars.size(); ++t) {
      CHECK(noise.prices[c].bars[t].close == signal.prices[c].bars[t].close);
    }
  }
  bool differs = false;
  for (std::size_t i = 0; i < noise.embeddings.size() && !differs; ++i) {
    differs = noise.embeddings[i].values != signal.embeddings[i].values;
  }
  CHECK(differs);
}

TEST_CASE("mentions stay within the main company's industry") {
  const auto corpus = generate(probe_config(1.0));
  std::map<std::string, std::string> industry;
  for (const auto& e : corpus.screener.entries()) industry[e.symbol] = e.industry;
  std::size_t mentions = 0;
  for (const auto& a : corpus.articles) {
    for (const auto& m : a.mentioned_symbols) {
      CHECK(m != a.main_symbol);
      CHECK(industry.at(m) == industry.at(a.main_symbol));
      ++mentions;
    }
  }
  CHECK(mentions > 0);
}

TEST_CASE("logistic probe on embeddings") {
  SUBCASE("no signal") {
    const auto samples = probe_samples(generate(probe_config(0.0)), 1);
    REQUIRE(samples.size() >= 5000);
    CHECK(std::abs(probe_accuracy(samples, samples.size() / 2) - 0.5) <= 0.03);
  }
  SUBCASE("full signal") {
    const auto samples = probe_samples(generate(probe_config(1.0)), 1);
    REQUIRE(samples.size() >= 5000);
    CHECK(probe_accuracy(samples, samples.size() / 2) >= 0.9);
  }
  SUBCASE("nothing about the day after next") {
    const auto samples = probe_samples(generate(probe_config(1.0)), 2);
    CHECK(std::abs(probe_accuracy(samples, samples.size() / 2) - 0.5) <= 0.03);
  }
}

TEST_CASE("direction labels are balanced") {
  SynthConfig cfg;
  cfg.seed = 3;
  const auto corpus = generate(cfg);
  std::size_t up = 0, total = 0;
  for (const auto& s : corpus.prices) {
    for (std::size_t t = 1; t < s.bars.size(); ++t) {
      up += static_cast<std::size_t>(labels::label_direction(s.bars[t].close, s.bars[t - 1].close));
      ++total;
    }
  }
  REQUIRE(total >= 10000);
  CHECK(std::abs(static_cast<double>(up) / static_cast<double>(total) - 0.5) <= 0.03);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.signal_strength = 1.5;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg = SynthConfig{};
  cfg.companies = 0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg = SynthConfig{};
  cfg.rate_min = 2.0;
  cfg.rate_max = 1.0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
}
