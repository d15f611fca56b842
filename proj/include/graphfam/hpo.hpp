#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "graphfam/dataset.hpp"
#include "graphfam/model.hpp"

namespace graphfam {

struct SearchSpace {
  std::vector<int> hidden_choices = {32, 64, 96, 128};
  double lr_min = 1e-5;
  double lr_max = 3e-3;  // sampled log-uniform
  double dropout_min = 0.2;
  double dropout_max = 0.5;
};

struct TrialRecord {
  int trial = 0;
  ModelConfig config;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;
  std::int64_t parameter_count = 0;
};

struct TuneResult {
  ModelConfig best;
  int best_trial = -1;
  std::vector<TrialRecord> trials;
};

ModelConfig sample_config(const SearchSpace& space, Architecture arch,
                          std::mt19937_64& rng, int node_dim, int graph_dim);

struct TuneOptions {
  int n_trials = 50;
  int trial_epochs = 10;
  int batch_size = 32;
  SearchSpace space;
};

/// Seeded random search; each trial trains trial_epochs epochs without early
/// stopping and is ranked by its final validation loss (ties to the earlier
/// trial). Per-trial seeds derive from (seed, architecture, trial index), so
/// trials are order-independent; they run in parallel on the worker pool.
TuneResult tune(Architecture arch, const Dataset& dataset, const TuneOptions& opts,
                std::uint64_t seed);

/// Rows sorted ascending by validation loss (stable on ties).
std::vector<const TrialRecord*> report_trials(const std::vector<TrialRecord>& records);

/// Tab-delimited trial table: architecture, sampled values, size, time, metrics.
void write_trial_table(std::ostream& out, const std::vector<TrialRecord>& records);

}  // namespace graphfam
