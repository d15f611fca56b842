#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphfam/dataset.hpp"
#include "graphfam/metrics.hpp"
#include "graphfam/model.hpp"

namespace graphfam {

struct TrainOptions {
  int max_epochs = 100;
  int early_stop_patience = 10;  // 0 disables early stopping
  int batch_size = 32;
  int scheduler_patience = 5;
  double scheduler_factor = 0.5;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based
  double best_val_loss = 0.0;
  std::string stop_reason;  // "max_epochs" or "early_stop"
  double wall_seconds = 0.0;
  ConfusionMatrix confusion;  // validation split, best checkpoint
  std::vector<int> val_true;
  std::vector<int> val_pred;
};

/// Full training loop: shuffled train batches, Adam, plateau scheduler on the
/// validation loss, early stopping, best-checkpoint restoration.
TrainReport train(GraphClassifier& model, const Dataset& dataset, const TrainOptions& opts);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int> true_labels;
  std::vector<int> predictions;
  Tensor embeddings;  // one row per evaluated record
};

/// Eval-mode pass over the given records (batched, deterministic).
EvalResult evaluate(GraphClassifier& model, const Dataset& dataset,
                    const std::vector<int>& record_indices, int batch_size);

/// Splits indices into batches; a trailing singleton is absorbed into the
/// previous batch so training-mode batch norm always sees >= 2 rows.
std::vector<std::vector<int>> make_batches(const std::vector<int>& indices, int batch_size);

void write_train_report(std::ostream& out, const TrainReport& report, bool include_timing);

}  // namespace graphfam
