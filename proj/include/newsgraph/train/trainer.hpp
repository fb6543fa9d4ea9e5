#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/labels.hpp"
#include "newsgraph/model/gnn.hpp"

namespace newsgraph::train {

struct TrainConfig {
  std::size_t epochs = 55;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t batch_size = 4;  // snapshots per optimizer step
  // Last fraction of the training days, held out for the history curve only.
  double validation_fraction = 0.1;
  std::uint64_t seed = 7;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;
  double train_loss = 0.0;  // mean per-snapshot loss over the epoch
  std::optional<double> train_accuracy;
  std::optional<double> validation_accuracy;
};

struct TrainHistory {
  std::size_t fit_snapshots = 0;
  std::size_t validation_snapshots = 0;
  std::vector<EpochRecord> epochs;
};

std::vector<graph::Snapshot> build_snapshots(const data::PreparedDataset& dataset,
                                             const std::vector<std::size_t>& days, const graph::GraphConfig& config);

// Rows of the forward output that enter the loss: complete companies with a
// label under `target`.
struct LossRows {
  std::vector<std::size_t> rows;
  num::Tensor targets;  // [rows, 1]
};
LossRows loss_rows(const graph::Snapshot& snapshot, const std::vector<std::size_t>& companies,
                   labels::TargetMode target);

struct SnapshotLoss {
  num::Var loss;  // mean BCE over the loss rows
  std::size_t correct = 0;
  std::size_t count = 0;
};
// nullopt when the snapshot has no loss rows.
std::optional<SnapshotLoss> snapshot_loss(num::Tape& tape, model::Model& model, const graph::Snapshot& snapshot,
                                          labels::TargetMode target, model::Mode mode);

// Mean per-snapshot loss and accuracy in eval mode.
struct Evaluation {
  double loss = 0.0;
  std::optional<double> accuracy;
};
Evaluation evaluate_loss(model::Model& model, const std::vector<graph::Snapshot>& snapshots,
                         labels::TargetMode target);

// Returning false ends training after that epoch.
using EpochCallback = std::function<bool(const EpochRecord&)>;

// Each epoch shuffles the fitting snapshots with a seed derived from the
// configured seed and the epoch number, then takes ceil(n / batch) AdamW steps
// on the summed per-snapshot losses.
TrainHistory train(model::Model& model, const std::vector<graph::Snapshot>& snapshots, labels::TargetMode target,
                   const TrainConfig& config, const EpochCallback& on_epoch = {});

std::string render_history(const TrainHistory& history);

}  // namespace newsgraph::train
