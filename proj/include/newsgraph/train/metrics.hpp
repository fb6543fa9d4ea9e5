#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/model/gnn.hpp"

namespace newsgraph::train {

// Standard normal CDF via erfc.
double normal_cdf(double x);

struct ZTest {
  double p_hat = 0.0;
  double p0 = 0.5;
  std::size_t n = 0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 0.0;  // one-sided, 1 - Phi(z)
};

// One-sample proportion z-test of p_hat against p0.
ZTest z_test(double p_hat, double p0, std::size_t n);

struct Prediction {
  std::size_t day = 0;
  std::string company;
  double probability = 0.5;
  int label = 0;
};

struct EvalData {
  std::vector<Prediction> predictions;
  // Distinct articles linked to each company (main or mentioned) over the
  // evaluated snapshots; every company of the snapshots has an entry.
  std::map<std::string, std::set<std::string>> mentions;
  std::size_t skipped_unlabeled = 0;   // complete window but no label
  std::size_t skipped_incomplete = 0;  // window incomplete
};

EvalData collect_predictions(model::Model& model, const std::vector<graph::Snapshot>& snapshots,
                             labels::TargetMode target);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

Confusion confusion_of(const std::vector<int>& predicted, const std::vector<int>& labels);

struct ClassMetrics {
  std::optional<double> accuracy, precision, recall, f1;
};
// Empty denominators give nullopt ("n/a").
ClassMetrics class_metrics(const Confusion& c);

struct TopK {
  std::size_t requested = 0;
  std::size_t used = 0;  // predictions in the slice
  bool per_company = false;
  Confusion confusion;
  std::optional<double> accuracy, precision;
};

struct CompanyRow {
  std::string symbol;
  std::size_t mentions = 0;
  std::size_t samples = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;
};

struct MetricsReport {
  std::string model;
  std::string target;
  std::size_t samples = 0;
  Confusion confusion;
  ClassMetrics metrics;
  TopK top_k;
  std::optional<ZTest> z;
  std::size_t skipped_unlabeled = 0;
  std::size_t skipped_incomplete = 0;
  std::vector<CompanyRow> companies;  // sorted by symbol
};

// Threshold 0.5. The top-K slice takes the K most confident (company, day)
// predictions by max(p, 1 - p); with `per_company` it takes every prediction of
// the K companies whose mean probability is most confident. Direction reports
// carry the z-test against 0.5.
MetricsReport evaluate(const EvalData& data, labels::TargetMode target, std::size_t k, bool per_company,
                       std::string model_name);

struct DecileAccuracy {
  double bottom = 0.0;
  double top = 0.0;
  std::size_t size = 0;
};
// Mean per-company accuracy of the least and most mentioned tenth of the
// companies that have predictions.
DecileAccuracy mention_deciles(const std::vector<CompanyRow>& companies);

std::string render_text(const MetricsReport& report, bool per_company = false);
std::string render_delimited(const MetricsReport& report);
MetricsReport parse_delimited(std::string_view text);

}  // namespace newsgraph::train
