#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphfam/config.hpp"
#include "graphfam/dataset.hpp"
#include "graphfam/generators.hpp"
#include "graphfam/hpo.hpp"
#include "graphfam/model.hpp"

namespace graphfam {

struct FamilyDistributions {
  double er_degree_min = 5.0;
  double er_degree_max = 15.0;
  std::vector<int> ws_k_choices = {6, 8, 10, 12};
  double ws_p_min = 0.01;
  double ws_p_max = 0.3;
  std::vector<int> ba_m_choices = {3, 4, 5};
  std::vector<int> hk_m_choices = {3, 4, 5};
  double hk_p_min = 0.1;
  double hk_p_max = 0.9;
  std::vector<int> sbm_block_choices = {2, 3, 4, 5};
  double sbm_degree_min = 5.0;
  double sbm_degree_max = 22.0;
  double sbm_ratio_min = 5.0;
  double sbm_ratio_max = 20.0;
};

struct PipelineConfig {
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  int workers = 0;
  std::string scale = "desk";
  int graphs_per_family = 40;
  int node_min = 200;
  int node_max = 400;
  double val_fraction = 0.2;
  int hpo_trials = 10;   // 0 skips tuning and trains the default config
  int hpo_epochs = 5;
  int max_epochs = 100;
  int early_stop_patience = 10;
  int batch_size = 32;
  double prune_threshold = 0.8;
  int selection_forests = 5;
  int selection_trees = 100;
  double svm_c = 1.0;
  double svm_gamma = 0.0;  // auto
  std::vector<std::string> architectures = {"GCN", "GIN", "GAT", "GATv2", "SAGE", "GTN"};
  FamilyDistributions dist;
};

/// Applies the scale presets (desk: 40 graphs/family at 200-400 nodes,
/// HPO 10x5; paper: 400 graphs/family at 5000-10000 nodes, HPO 50x10).
void apply_scale(PipelineConfig& config, const std::string& scale);

PipelineConfig pipeline_config_from(const Config& file);
Config pipeline_config_to(const PipelineConfig& config);

/// Fallback model shape when tuning is skipped (mid-range of the search space).
ModelConfig default_model_config(Architecture arch);

struct GeneratedGraph {
  Graph graph;
  Provenance prov;
};

/// Deterministic per-record generation: seeds derive from
/// (pipeline seed, family, index).
GeneratedGraph generate_record(const PipelineConfig& config, Family family, int index);

/// Generates all records (parallel), screens connectivity, assigns the
/// stratified split. Features are not yet computed.
Dataset build_dataset(const PipelineConfig& config);

// File-driven stages; each reads its inputs from and writes its outputs under
// config.out_dir so stages can run independently.
void stage_generate(const PipelineConfig& config);
void stage_features(const PipelineConfig& config);
void stage_select(const PipelineConfig& config);
void stage_tune(const PipelineConfig& config, const std::string& arch);   // arch or "all"
void stage_train(const PipelineConfig& config, const std::string& arch);  // arch, "SVM" or "all"
void stage_evaluate(const PipelineConfig& config, const std::string& arch);
void stage_report(const PipelineConfig& config);
void write_manifest(const PipelineConfig& config);

/// Full pipeline: generate, features, select, tune, train (GNNs + SVM),
/// report, manifest.
void run_all(const PipelineConfig& config);

/// Reloads the dataset (graphs, features, split, stats) from the stage files.
Dataset load_dataset(const PipelineConfig& config, bool require_features);

}  // namespace graphfam
