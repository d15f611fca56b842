#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "graphfam/parallel.hpp"
#include "graphfam/pipeline.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::string scale;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
  int graphs_per_family = -1;
  int node_min = -1;
  int node_max = -1;
  double val_fraction = -1.0;
  int trials = -1;
  int trial_epochs = -1;
  int max_epochs = -1;
  int early_stop_patience = -1;
  int batch_size = -1;
};

graphfam::PipelineConfig resolve(const CliOverrides& cli) {
  graphfam::PipelineConfig config;
  if (!cli.config_path.empty())
    config = graphfam::pipeline_config_from(graphfam::Config::load(cli.config_path));
  if (!cli.scale.empty()) graphfam::apply_scale(config, cli.scale);
  if (!cli.out_dir.empty()) config.out_dir = cli.out_dir;
  if (cli.seed_set) config.seed = cli.seed;
  if (cli.workers >= 0) config.workers = cli.workers;
  if (cli.graphs_per_family >= 0) config.graphs_per_family = cli.graphs_per_family;
  if (cli.node_min >= 0) config.node_min = cli.node_min;
  if (cli.node_max >= 0) config.node_max = cli.node_max;
  if (cli.val_fraction >= 0.0) config.val_fraction = cli.val_fraction;
  if (cli.trials >= 0) config.hpo_trials = cli.trials;
  if (cli.trial_epochs >= 0) config.hpo_epochs = cli.trial_epochs;
  if (cli.max_epochs >= 0) config.max_epochs = cli.max_epochs;
  if (cli.early_stop_patience >= 0) config.early_stop_patience = cli.early_stop_patience;
  if (cli.batch_size >= 0) config.batch_size = cli.batch_size;
  graphfam::ThreadPool::instance().set_workers(config.workers);
  return config;
}

void add_common(CLI::App* cmd, CliOverrides& cli) {
  cmd->add_option("--config", cli.config_path, "Config file (key/value with [sections])");
  cmd->add_option("--out", cli.out_dir, "Output directory");
  cmd->add_option("--seed", cli.seed, "Master seed")->each([&](const std::string&) {
    cli.seed_set = true;
  });
  cmd->add_option("--workers", cli.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--scale", cli.scale, "Preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--graphs-per-family", cli.graphs_per_family, "Graphs per family");
  cmd->add_option("--node-min", cli.node_min, "Lower node-count bound");
  cmd->add_option("--node-max", cli.node_max, "Upper node-count bound");
  cmd->add_option("--val-fraction", cli.val_fraction, "Validation fraction");
  cmd->add_option("--trials", cli.trials, "HPO trials per architecture");
  cmd->add_option("--trial-epochs", cli.trial_epochs, "Epochs per HPO trial");
  cmd->add_option("--max-epochs", cli.max_epochs, "Final-training epoch cap");
  cmd->add_option("--early-stop-patience", cli.early_stop_patience,
                  "Early-stopping patience (0 disables)");
  cmd->add_option("--batch-size", cli.batch_size, "Graphs per batch");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphfam: synthetic graph family classification benchmark"};
  app.require_subcommand(1);

  CliOverrides cli;
  std::string arch = "all";

  CLI::App* generate = app.add_subcommand("generate", "Build the graph dataset");
  CLI::App* features = app.add_subcommand("features", "Extract node/graph/candidate features");
  CLI::App* select = app.add_subcommand("select", "Random-forest recursive feature pruning");
  CLI::App* tune = app.add_subcommand("tune", "Random-search hyperparameter tuning");
  CLI::App* train = app.add_subcommand("train", "Train final models (GNNs and SVM)");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Re-evaluate a saved model checkpoint");
  CLI::App* report = app.add_subcommand("report", "Summarize metric files");
  CLI::App* runall = app.add_subcommand("run-all", "Full pipeline end to end");

  for (CLI::App* cmd : {generate, features, select, tune, train, evaluate, report, runall})
    add_common(cmd, cli);
  tune->add_option("--arch", arch, "Architecture (GCN, GIN, GAT, GATv2, SAGE, GTN) or all");
  train->add_option("--arch", arch, "Architecture, SVM, or all");
  evaluate->add_option("--arch", arch, "Architecture")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    graphfam::PipelineConfig config = resolve(cli);
    if (generate->parsed()) graphfam::stage_generate(config);
    if (features->parsed()) graphfam::stage_features(config);
    if (select->parsed()) graphfam::stage_select(config);
    if (tune->parsed()) graphfam::stage_tune(config, arch);
    if (train->parsed()) graphfam::stage_train(config, arch);
    if (evaluate->parsed()) graphfam::stage_evaluate(config, arch);
    if (report->parsed()) graphfam::stage_report(config);
    if (runall->parsed()) graphfam::run_all(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
