#include "newsgraph/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "newsgraph/errors.hpp"
#include "newsgraph/numerics/adamw.hpp"
#include "newsgraph/seed.hpp"

namespace newsgraph::train {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("train.validation_fraction must lie in [0, 1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train betas must lie in [0, 1)");
  if (!(eps > 0.0) || !(weight_decay >= 0.0)) throw ConfigError("train.eps must be positive, weight_decay non-negative");
}

std::vector<graph::Snapshot> build_snapshots(const data::PreparedDataset& dataset,
                                             const std::vector<std::size_t>& days, const graph::GraphConfig& config) {
  std::vector<graph::Snapshot> out;
  out.reserve(days.size());
  for (std::size_t d : days) out.push_back(graph::build_snapshot(d, dataset, config));
  return out;
}

LossRows loss_rows(const graph::Snapshot& snapshot, const std::vector<std::size_t>& companies,
                   labels::TargetMode target) {
  LossRows out;
  std::vector<double> targets;
  for (std::size_t r = 0; r < companies.size(); ++r) {
    const std::size_t id = companies[r];
    const auto label = snapshot.label(id, target);
    if (!snapshot.complete(id) || !label) continue;
    out.rows.push_back(r);
    targets.push_back(*label);
  }
  if (!targets.empty()) out.targets = num::Tensor::column(std::move(targets));
  return out;
}

std::optional<SnapshotLoss> snapshot_loss(num::Tape& tape, model::Model& model, const graph::Snapshot& snapshot,
                                          labels::TargetMode target, model::Mode mode) {
  const auto out = model.forward(tape, snapshot, mode);
  auto rows = loss_rows(snapshot, out.companies, target);
  if (rows.rows.empty()) return std::nullopt;
  SnapshotLoss result;
  const auto& logits = out.logits.value();
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const int predicted = logits[rows.rows[i]] > 0.0 ? 1 : 0;
    result.correct += predicted == static_cast<int>(rows.targets[i]) ? 1 : 0;
  }
  result.count = rows.rows.size();
  result.loss = num::bce_with_logits(num::gather_rows(out.logits, std::move(rows.rows)), rows.targets);
  return result;
}

Evaluation evaluate_loss(model::Model& model, const std::vector<graph::Snapshot>& snapshots,
                         labels::TargetMode target) {
  Evaluation ev;
  std::size_t used = 0, correct = 0, count = 0;
  for (const auto& s : snapshots) {
    num::Tape tape;
    const auto l = snapshot_loss(tape, model, s, target, model::Mode::Eval);
    if (!l) continue;
    ev.loss += l->loss.value().item();
    ++used;
    correct += l->correct;
    count += l->count;
  }
  if (used > 0) ev.loss /= static_cast<double>(used);
  if (count > 0) ev.accuracy = static_cast<double>(correct) / static_cast<double>(count);
  return ev;
}

TrainHistory train(model::Model& model, const std::vector<graph::Snapshot>& snapshots, labels::TargetMode target,
                   const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (snapshots.empty()) throw DataError("train: empty training split");
  const auto n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(snapshots.size())));
  if (n_val >= snapshots.size()) throw DataError("train: validation hold-out leaves no training snapshots");
  const std::size_t n_fit = snapshots.size() - n_val;
  const std::vector<graph::Snapshot> validation(snapshots.begin() + static_cast<std::ptrdiff_t>(n_fit), snapshots.end());

  TrainHistory history;
  history.fit_snapshots = n_fit;
  history.validation_snapshots = n_val;

  auto& store = model.params();
  num::AdamWState state = num::AdamWState::zeros_like(store);
  const num::AdamWConfig adam{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};

  std::vector<std::size_t> order(n_fit);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(config.seed, "shuffle", epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord record;
    record.epoch = epoch;
    std::size_t losses = 0, correct = 0, count = 0;
    for (std::size_t begin = 0; begin < n_fit; begin += config.batch_size) {
      const std::size_t end = std::min(begin + config.batch_size, n_fit);
      std::vector<num::Tensor> grads;
      double step_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        num::Tape tape;
        const auto l = snapshot_loss(tape, model, snapshots[order[i]], target, model::Mode::Train);
        if (!l) continue;
        const double value = l->loss.value().item();
        if (!std::isfinite(value)) {
          throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                               std::to_string(record.steps + 1) + " (day " +
                               std::to_string(snapshots[order[i]].target_day()) + ")");
        }
        auto g = tape.backward(l->loss).parameters(store);
        if (grads.empty()) {
          grads = std::move(g);
        } else {
          for (std::size_t p = 0; p < grads.size(); ++p) grads[p].accumulate(g[p]);
        }
        step_loss += value;
        ++losses;
        correct += l->correct;
        count += l->count;
      }
      if (grads.empty()) {
        for (const auto& p : store) grads.emplace_back(p.value.shape(), 0.0);
      }
      try {
        num::adamw_step(store, grads, state, adam);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(record.steps + 1));
      }
      record.train_loss += step_loss;
      ++record.steps;
    }
    if (losses > 0) record.train_loss /= static_cast<double>(losses);
    if (count > 0) record.train_accuracy = static_cast<double>(correct) / static_cast<double>(count);
    if (!validation.empty()) record.validation_accuracy = evaluate_loss(model, validation, target).accuracy;
    history.epochs.push_back(record);
    if (on_epoch && !on_epoch(record)) break;
  }
  return history;
}

std::string render_history(const TrainHistory& history) {
  std::string out = "# newsgraph-history 1\n";
  out += "fit_snapshots\t" + std::to_string(history.fit_snapshots) + "\n";
  out += "validation_snapshots\t" + std::to_string(history.validation_snapshots) + "\n";
  out += "epoch\tsteps\ttrain_loss\ttrain_accuracy\tvalidation_accuracy\n";
  char buf[64];
  auto opt = [&](const std::optional<double>& v) -> std::string {
    if (!v) return "n/a";
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
  };
  for (const auto& e : history.epochs) {
    std::snprintf(buf, sizeof buf, "%.6f", e.train_loss);
    out += std::to_string(e.epoch) + "\t" + std::to_string(e.steps) + "\t" + buf + "\t";
    out += opt(e.train_accuracy) + "\t" + opt(e.validation_accuracy) + "\n";
  }
  return out;
}

}  // namespace newsgraph::train
