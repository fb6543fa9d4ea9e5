#include "newsgraph/train/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "newsgraph/errors.hpp"

namespace newsgraph::train {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ZTest z_test(double p_hat, double p0, std::size_t n) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("z_test: p0 must lie in (0, 1)");
  if (n == 0) throw ConfigError("z_test: n must be at least 1");
  ZTest t;
  t.p_hat = p_hat;
  t.p0 = p0;
  t.n = n;
  t.se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
  t.z = (p_hat - p0) / t.se;
  t.p_value = 0.5 * std::erfc(t.z / std::sqrt(2.0));
  return t;
}

EvalData collect_predictions(model::Model& model, const std::vector<graph::Snapshot>& snapshots,
                             labels::TargetMode target) {
  EvalData data;
  for (const auto& s : snapshots) {
    const auto probs = model.predict(s);
    std::size_t row = 0;
    for (std::size_t id = 0; id < s.size(); ++id) {
      const auto& node = s.node(id);
      if (node.ref.kind != graph::NodeKind::Company) continue;
      const double p = probs[row++];
      auto& linked = data.mentions[node.ref.key];
      for (auto kind : {graph::EdgeKind::ArticleMainCompany, graph::EdgeKind::ArticleMentionedCompany}) {
        for (std::size_t a : s.neighbors(id, kind)) linked.insert(s.node(a).ref.key);
      }
      if (!s.complete(id)) {
        ++data.skipped_incomplete;
        continue;
      }
      const auto label = s.label(id, target);
      if (!label) {
        ++data.skipped_unlabeled;
        continue;
      }
      data.predictions.push_back({s.target_day(), node.ref.key, p, *label});
    }
  }
  return data;
}

Confusion confusion_of(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (predicted.size() != labels.size()) throw ShapeError("confusion_of: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == 1) {
      (labels[i] == 1 ? c.tp : c.fp)++;
    } else {
      (labels[i] == 1 ? c.fn : c.tn)++;
    }
  }
  return c;
}

ClassMetrics class_metrics(const Confusion& c) {
  ClassMetrics m;
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision && m.recall) {
    const double s = *m.precision + *m.recall;
    m.f1 = s > 0.0 ? 2.0 * *m.precision * *m.recall / s : 0.0;
  }
  return m;
}

namespace {

double confidence(double p) { return std::max(p, 1.0 - p); }

}  // namespace

MetricsReport evaluate(const EvalData& data, labels::TargetMode target, std::size_t k, bool per_company,
                       std::string model_name) {
  const auto& preds = data.predictions;
  if (preds.empty()) throw DataError("evaluate: no labelled test predictions");
  MetricsReport r;
  r.model = std::move(model_name);
  r.target = std::string(labels::to_string(target));
  r.samples = preds.size();
  r.skipped_unlabeled = data.skipped_unlabeled;
  r.skipped_incomplete = data.skipped_incomplete;

  std::vector<int> predicted, truth;
  for (const auto& p : preds) {
    predicted.push_back(p.probability > 0.5 ? 1 : 0);
    truth.push_back(p.label);
  }
  r.confusion = confusion_of(predicted, truth);
  r.metrics = class_metrics(r.confusion);

  // Top-K slice.
  r.top_k.requested = k;
  r.top_k.per_company = per_company;
  std::vector<std::size_t> slice;
  if (per_company) {
    std::map<std::string, std::pair<double, std::size_t>> mean;
    for (const auto& p : preds) {
      auto& m = mean[p.company];
      m.first += p.probability;
      ++m.second;
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [company, m] : mean) ranked.push_back({confidence(m.first / static_cast<double>(m.second)), company});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::set<std::string> chosen;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) chosen.insert(ranked[i].second);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (chosen.count(preds[i].company) != 0) slice.push_back(i);
    }
  } else {
    slice.resize(preds.size());
    std::iota(slice.begin(), slice.end(), 0);
    std::stable_sort(slice.begin(), slice.end(), [&](std::size_t a, std::size_t b) {
      return confidence(preds[a].probability) > confidence(preds[b].probability);
    });
    slice.resize(std::min(k, slice.size()));
  }
  std::vector<int> sp, st;
  for (std::size_t i : slice) {
    sp.push_back(predicted[i]);
    st.push_back(truth[i]);
  }
  r.top_k.used = slice.size();
  r.top_k.confusion = confusion_of(sp, st);
  const auto top = class_metrics(r.top_k.confusion);
  r.top_k.accuracy = top.accuracy;
  r.top_k.precision = top.precision;

  if (target == labels::TargetMode::Direction) r.z = z_test(*r.metrics.accuracy, 0.5, r.samples);

  std::map<std::string, CompanyRow> rows;
  for (const auto& [company, articles] : data.mentions) {
    rows[company].symbol = company;
    rows[company].mentions = articles.size();
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& row = rows[preds[i].company];
    row.symbol = preds[i].company;
    ++row.samples;
    row.correct += predicted[i] == truth[i] ? 1 : 0;
  }
  for (auto& [company, row] : rows) {
    if (row.samples > 0) row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.samples);
    r.companies.push_back(row);
  }
  return r;
}

DecileAccuracy mention_deciles(const std::vector<CompanyRow>& companies) {
  std::vector<const CompanyRow*> rows;
  for (const auto& c : companies) {
    if (c.accuracy) rows.push_back(&c);
  }
  if (rows.empty()) throw DataError("mention_deciles: no company has predictions");
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return a->mentions != b->mentions ? a->mentions < b->mentions : a->symbol < b->symbol;
  });
  DecileAccuracy out;
  out.size = std::max<std::size_t>(1, rows.size() / 10);
  for (std::size_t i = 0; i < out.size; ++i) {
    out.bottom += *rows[i]->accuracy;
    out.top += *rows[rows.size() - 1 - i]->accuracy;
  }
  out.bottom /= static_cast<double>(out.size);
  out.top /= static_cast<double>(out.size);
  return out;
}

namespace {

std::string fixed(const std::optional<double>& v, int digits = 4) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

std::string exact(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, ptr);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_text(const MetricsReport& r, bool per_company) {
  std::ostringstream out;
  const auto& m = r.metrics;
  const auto& c = r.confusion;
  out << "model      " << r.model << '\n';
  out << "target     " << r.target << '\n';
  out << "samples    " << r.samples << " (skipped: " << r.skipped_unlabeled << " unlabelled, " << r.skipped_incomplete
      << " incomplete window)\n";
  out << '\n';
  out << pad("slice", 18) << pad("accuracy", 10) << pad("precision", 11) << pad("recall", 8) << "f1\n";
  out << pad("all", 18) << pad(fixed(m.accuracy), 10) << pad(fixed(m.precision), 11) << pad(fixed(m.recall), 8)
      << fixed(m.f1) << '\n';
  const std::string top_name = "top-" + std::to_string(r.top_k.requested) + (r.top_k.per_company ? "/company" : "");
  out << pad(top_name, 18) << pad(fixed(r.top_k.accuracy), 10) << pad(fixed(r.top_k.precision), 11)
      << pad("-", 8) << "-\n";
  out << '\n';
  out << "confusion  tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn << '\n';
  out << "top-k      " << r.top_k.used << " predictions in slice\n";
  if (r.z) {
    out << "z-test     p_hat=" << fixed(r.z->p_hat) << " p0=" << fixed(r.z->p0, 2) << " n=" << r.z->n
        << " se=" << fixed(r.z->se, 5) << " z=" << fixed(r.z->z, 2) << " p=" << fixed(r.z->p_value, 6) << '\n';
  } else {
    out << "z-test     n/a\n";
  }
  if (per_company) {
    out << '\n' << pad("company", 10) << pad("mentions", 10) << pad("samples", 9) << "accuracy\n";
    std::vector<const CompanyRow*> rows;
    for (const auto& row : r.companies) rows.push_back(&row);
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->mentions > b->mentions; });
    for (const auto* row : rows) {
      out << pad(row->symbol, 10) << pad(std::to_string(row->mentions), 10) << pad(std::to_string(row->samples), 9)
          << fixed(row->accuracy) << '\n';
    }
  }
  return out.str();
}

std::string render_delimited(const MetricsReport& r) {
  std::ostringstream out;
  out << "# newsgraph-report 1\n";
  auto kv = [&](const std::string& key, const std::string& value) { out << key << '\t' << value << '\n'; };
  kv("model", r.model);
  kv("target", r.target);
  kv("samples", std::to_string(r.samples));
  kv("tp", std::to_string(r.confusion.tp));
  kv("fp", std::to_string(r.confusion.fp));
  kv("tn", std::to_string(r.confusion.tn));
  kv("fn", std::to_string(r.confusion.fn));
  kv("accuracy", exact(r.metrics.accuracy));
  kv("precision", exact(r.metrics.precision));
  kv("recall", exact(r.metrics.recall));
  kv("f1", exact(r.metrics.f1));
  kv("topk_requested", std::to_string(r.top_k.requested));
  kv("topk_used", std::to_string(r.top_k.used));
  kv("topk_per_company", r.top_k.per_company ? "1" : "0");
  kv("topk_tp", std::to_string(r.top_k.confusion.tp));
  kv("topk_fp", std::to_string(r.top_k.confusion.fp));
  kv("topk_tn", std::to_string(r.top_k.confusion.tn));
  kv("topk_fn", std::to_string(r.top_k.confusion.fn));
  kv("topk_accuracy", exact(r.top_k.accuracy));
  kv("topk_precision", exact(r.top_k.precision));
  if (r.z) {
    kv("z_p_hat", exact(r.z->p_hat));
    kv("z_p0", exact(r.z->p0));
    kv("z_n", std::to_string(r.z->n));
    kv("z_se", exact(r.z->se));
    kv("z_z", exact(r.z->z));
    kv("z_p_value", exact(r.z->p_value));
  } else {
    kv("z_test", "n/a");
  }
  kv("skipped_unlabeled", std::to_string(r.skipped_unlabeled));
  kv("skipped_incomplete", std::to_string(r.skipped_incomplete));
  out << "company\tsymbol\tmentions\tsamples\tcorrect\taccuracy\n";
  for (const auto& row : r.companies) {
    out << "company\t" << row.symbol << '\t' << row.mentions << '\t' << row.samples << '\t' << row.correct << '\t'
        << exact(row.accuracy) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::size_t to_size(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("report", line, "value", "expected an integer, got '" + s + "'");
  }
  return v;
}

std::optional<double> to_opt(const std::string& s, std::size_t line) {
  if (s == "n/a") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("report", line, "value", "expected a number or n/a, got '" + s + "'");
  }
  return v;
}

double to_double(const std::string& s, std::size_t line) {
  const auto v = to_opt(s, line);
  if (!v) throw DataError("report", line, "value", "unexpected n/a");
  return *v;
}

}  // namespace

MetricsReport parse_delimited(std::string_view text) {
  MetricsReport r;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line) || line != "# newsgraph-report 1") {
    throw DataError("report", 1, "header", "expected '# newsgraph-report 1'");
  }
  ++number;
  ZTest z;
  bool has_z = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    const std::string& key = f[0];
    if (key == "company") {
      if (f.size() != 6) throw DataError("report", number, "company", "expected 6 fields");
      if (f[1] == "symbol") continue;
      CompanyRow row;
      row.symbol = f[1];
      row.mentions = to_size(f[2], number);
      row.samples = to_size(f[3], number);
      row.correct = to_size(f[4], number);
      row.accuracy = to_opt(f[5], number);
      r.companies.push_back(row);
      continue;
    }
    if (f.size() != 2) throw DataError("report", number, key, "expected key and value");
    const std::string& v = f[1];
    if (key == "model") r.model = v;
    else if (key == "target") r.target = v;
    else if (key == "samples") r.samples = to_size(v, number);
    else if (key == "tp") r.confusion.tp = to_size(v, number);
    else if (key == "fp") r.confusion.fp = to_size(v, number);
    else if (key == "tn") r.confusion.tn = to_size(v, number);
    else if (key == "fn") r.confusion.fn = to_size(v, number);
    else if (key == "accuracy") r.metrics.accuracy = to_opt(v, number);
    else if (key == "precision") r.metrics.precision = to_opt(v, number);
    else if (key == "recall") r.metrics.recall = to_opt(v, number);
    else if (key == "f1") r.metrics.f1 = to_opt(v, number);
    else if (key == "topk_requested") r.top_k.requested = to_size(v, number);
    else if (key == "topk_used") r.top_k.used = to_size(v, number);
    else if (key == "topk_per_company") r.top_k.per_company = v == "1";
    else if (key == "topk_tp") r.top_k.confusion.tp = to_size(v, number);
    else if (key == "topk_fp") r.top_k.confusion.fp = to_size(v, number);
    else if (key == "topk_tn") r.top_k.confusion.tn = to_size(v, number);
    else if (key == "topk_fn") r.top_k.confusion.fn = to_size(v, number);
    else if (key == "topk_accuracy") r.top_k.accuracy = to_opt(v, number);
    else if (key == "topk_precision") r.top_k.precision = to_opt(v, number);
    else if (key == "z_p_hat") { z.p_hat = to_double(v, number); has_z = true; }
    else if (key == "z_p0") z.p0 = to_double(v, number);
    else if (key == "z_n") z.n = to_size(v, number);
    else if (key == "z_se") z.se = to_double(v, number);
    else if (key == "z_z") z.z = to_double(v, number);
    else if (key == "z_p_value") z.p_value = to_double(v, number);
    else if (key == "z_test") has_z = false;
    else if (key == "skipped_unlabeled") r.skipped_unlabeled = to_size(v, number);
    else if (key == "skipped_incomplete") r.skipped_incomplete = to_size(v, number);
    else throw DataError("report", number, key, "unknown key");
  }
  if (has_z) r.z = z;
  return r;
}

}  // namespace newsgraph::train
