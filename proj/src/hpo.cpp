#include "graphfam/hpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "graphfam/parallel.hpp"
#include "graphfam/rng.hpp"
#include "graphfam/training.hpp"

namespace graphfam {

ModelConfig sample_config(const SearchSpace& space, Architecture arch,
                          std::mt19937_64& rng, int node_dim, int graph_dim) {
  ModelConfig config;
  config.arch = arch;
  config.node_feature_dim = node_dim;
  config.graph_feature_dim = graph_dim;
  config.hidden = space.hidden_choices[uniform_index(rng, space.hidden_choices.size())];
  double u = uniform01(rng);
  config.learning_rate =
      std::exp(std::log(space.lr_min) + u * (std::log(space.lr_max) - std::log(space.lr_min)));
  config.dropout = space.dropout_min + uniform01(rng) * (space.dropout_max - space.dropout_min);
  return config;
}

TuneResult tune(Architecture arch, const Dataset& dataset, const TuneOptions& opts,
                std::uint64_t seed) {
  if (opts.n_trials < 1) throw std::invalid_argument("tune: n_trials must be >= 1");
  TuneResult result;
  result.trials.resize(opts.n_trials);
  parallel_for(opts.n_trials, 1, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      std::uint64_t trial_seed =
          derive_seed(seed, static_cast<std::uint64_t>(arch), static_cast<std::uint64_t>(t));
      std::mt19937_64 rng(trial_seed);
      ModelConfig config =
          sample_config(opts.space, arch, rng, kNodeFeatureCount, kGraphFeatureCount);
      GraphClassifier model(config, derive_seed(trial_seed, 1));
      TrainOptions topts;
      topts.max_epochs = opts.trial_epochs;
      topts.early_stop_patience = 0;
      topts.batch_size = opts.batch_size;
      topts.seed = derive_seed(trial_seed, 2);
      auto t0 = std::chrono::steady_clock::now();
      TrainReport report = train(model, dataset, topts);
      TrialRecord& rec = result.trials[static_cast<std::size_t>(t)];
      rec.trial = static_cast<int>(t);
      rec.config = config;
      rec.val_loss = report.epochs.back().val_loss;
      rec.val_accuracy = report.epochs.back().val_accuracy;
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.parameter_count = model.parameter_count();
    }
  });
  result.best_trial = 0;
  for (int t = 1; t < opts.n_trials; ++t) {
    if (result.trials[t].val_loss < result.trials[result.best_trial].val_loss)
      result.best_trial = t;
  }
  result.best = result.trials[result.best_trial].config;
  return result;
}

std::vector<const TrialRecord*> report_trials(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("report_trials: no records");
  std::vector<const TrialRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const TrialRecord* a, const TrialRecord* b) {
                     return a->val_loss < b->val_loss;
                   });
  return order;
}

void write_trial_table(std::ostream& out, const std::vector<TrialRecord>& records) {
  auto old = out.precision(17);
  out << "trial\tarchitecture\thidden_channels\tlearning_rate\tdropout_rate\t"
         "parameters\ttrain_time_s\tval_loss\tval_accuracy\n";
  for (const TrialRecord* r : report_trials(records)) {
    out << r->trial << '\t' << architecture_name(r->config.arch) << '\t'
        << r->config.hidden << '\t' << r->config.learning_rate << '\t'
        << r->config.dropout << '\t' << r->parameter_count << '\t' << r->wall_seconds
        << '\t' << r->val_loss << '\t' << r->val_accuracy << '\n';
  }
  out.precision(old);
}

}  // namespace graphfam
