#include "graphfam/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "graphfam/rng.hpp"

namespace graphfam {

namespace {

int argmax_row(const Tensor& t, int r) {
  int best = 0;
  for (int c = 1; c < t.cols; ++c) {
    if (t.at(r, c) > t.at(r, best)) best = c;
  }
  return best;
}

}  // namespace

std::vector<std::vector<int>> make_batches(const std::vector<int>& indices, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < indices.size(); i += batch_size) {
    std::size_t end = std::min(indices.size(), i + batch_size);
    batches.emplace_back(indices.begin() + i, indices.begin() + end);
  }
  if (batches.size() >= 2 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

EvalResult evaluate(GraphClassifier& model, const Dataset& dataset,
                    const std::vector<int>& record_indices, int batch_size) {
  if (record_indices.empty()) throw std::invalid_argument("evaluate: empty record set");
  EvalResult res;
  res.embeddings = Tensor(static_cast<int>(record_indices.size()), model.config().hidden);
  std::mt19937_64 unused_rng(0);
  double loss_acc = 0.0;
  std::int64_t correct = 0;
  int out_row = 0;
  for (const auto& batch_idx : make_batches(record_indices, batch_size)) {
    Batch batch = assemble_batch(dataset, batch_idx);
    Tape tape;
    auto out = model.forward(tape, batch.node_feats, batch.graph_feats, batch.structure,
                             Mode::kEval, unused_rng);
    Value loss = tape.cross_entropy(out.logits, batch.labels);
    loss_acc += loss.tensor().at(0, 0) * static_cast<double>(batch_idx.size());
    const Tensor& logits = out.logits.tensor();
    const Tensor& emb = out.embeddings.tensor();
    for (std::size_t r = 0; r < batch_idx.size(); ++r) {
      int pred = argmax_row(logits, static_cast<int>(r));
      res.predictions.push_back(pred);
      res.true_labels.push_back(batch.labels[r]);
      if (pred == batch.labels[r]) ++correct;
      std::copy(emb.row(static_cast<int>(r)), emb.row(static_cast<int>(r)) + emb.cols,
                res.embeddings.row(out_row));
      ++out_row;
    }
  }
  res.loss = loss_acc / static_cast<double>(record_indices.size());
  res.accuracy = static_cast<double>(correct) / static_cast<double>(record_indices.size());
  return res;
}

TrainReport train(GraphClassifier& model, const Dataset& dataset, const TrainOptions& opts) {
  if (dataset.split.size() != dataset.records.size())
    throw std::invalid_argument("train: split not assigned");
  std::vector<int> train_idx = dataset.indices_of(kTrainSplit);
  std::vector<int> val_idx = dataset.indices_of(kValSplit);
  if (train_idx.empty() || val_idx.empty())
    throw std::invalid_argument("train: empty split");

  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 shuffle_rng(derive_seed(opts.seed, 0));
  std::mt19937_64 dropout_rng(derive_seed(opts.seed, 1));
  PlateauScheduler scheduler(model.config().learning_rate);
  scheduler.patience = opts.scheduler_patience;
  scheduler.factor = opts.scheduler_factor;

  TrainReport report;
  double best_val = 0.0;
  bool has_best = false;
  int bad_epochs = 0;
  GraphClassifier::Snapshot best_snap;

  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    for (std::size_t i = train_idx.size() - 1; i > 0; --i) {
      std::size_t j = uniform_index(shuffle_rng, i + 1);
      std::swap(train_idx[i], train_idx[j]);
    }
    double train_loss = 0.0;
    std::int64_t train_correct = 0;
    for (const auto& batch_idx : make_batches(train_idx, opts.batch_size)) {
      Batch batch = assemble_batch(dataset, batch_idx);
      Tape tape;
      auto out = model.forward(tape, batch.node_feats, batch.graph_feats, batch.structure,
                               Mode::kTrain, dropout_rng);
      Value loss = tape.cross_entropy(out.logits, batch.labels);
      tape.backward(loss);
      model.adam_update(tape, scheduler.lr);
      train_loss += loss.tensor().at(0, 0) * static_cast<double>(batch_idx.size());
      const Tensor& logits = out.logits.tensor();
      for (std::size_t r = 0; r < batch_idx.size(); ++r) {
        if (argmax_row(logits, static_cast<int>(r)) == batch.labels[r]) ++train_correct;
      }
    }
    EvalResult val = evaluate(model, dataset, val_idx, opts.batch_size);

    EpochStats stats;
    stats.train_loss = train_loss / static_cast<double>(train_idx.size());
    stats.train_accuracy = static_cast<double>(train_correct) / static_cast<double>(train_idx.size());
    stats.val_loss = val.loss;
    stats.val_accuracy = val.accuracy;
    stats.lr = scheduler.lr;
    report.epochs.push_back(stats);

    scheduler.step(val.loss);

    if (!has_best || val.loss < best_val) {
      best_val = val.loss;
      has_best = true;
      report.best_epoch = epoch;
      best_snap = model.snapshot();
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    if (opts.early_stop_patience > 0 && bad_epochs >= opts.early_stop_patience) {
      report.stop_reason = "early_stop";
      break;
    }
  }
  if (report.stop_reason.empty()) report.stop_reason = "max_epochs";
  report.best_val_loss = best_val;
  model.restore(best_snap);

  EvalResult final_val = evaluate(model, dataset, val_idx, opts.batch_size);
  report.val_true = final_val.true_labels;
  report.val_pred = final_val.predictions;
  report.confusion = confusion(final_val.true_labels, final_val.predictions);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_train_report(std::ostream& out, const TrainReport& report, bool include_timing) {
  auto old = out.precision(17);
  out << "epochs_run = " << report.epochs.size() << '\n';
  out << "best_epoch = " << report.best_epoch << '\n';
  out << "best_val_loss = " << report.best_val_loss << '\n';
  out << "stop_reason = " << report.stop_reason << '\n';
  if (include_timing) out << "wall_seconds = " << report.wall_seconds << '\n';
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const EpochStats& s = report.epochs[e];
    out << "epoch " << e + 1 << " train_loss " << s.train_loss << " train_acc "
        << s.train_accuracy << " val_loss " << s.val_loss << " val_acc "
        << s.val_accuracy << " lr " << s.lr << '\n';
  }
  out.precision(old);
}

}  // namespace graphfam
