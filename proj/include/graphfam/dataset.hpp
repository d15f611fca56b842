#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "graphfam/features.hpp"
#include "graphfam/gnn.hpp"
#include "graphfam/graph.hpp"
#include "graphfam/tensor.hpp"

namespace graphfam {

struct Provenance {
  Family family = Family::ER;
  std::uint64_t seed = 0;
  std::string params;  // generator parameters, key=value pairs
  int initial_n = 0;   // node count before largest-component substitution
};

struct GraphRecord {
  Graph graph;
  Family label = Family::ER;
  std::vector<std::array<double, kNodeFeatureCount>> node_feats;  // raw
  GraphFeatures graph_feats;                                      // raw
  Provenance prov;
};

constexpr int kTrainSplit = 0;
constexpr int kValSplit = 1;

/// Column-wise standardization statistics fitted on the training split.
struct FeatureStats {
  std::array<double, kNodeFeatureCount> node_mean{};
  std::array<double, kNodeFeatureCount> node_std{};
  std::array<double, kGraphFeatureCount> graph_mean{};
  std::array<double, kGraphFeatureCount> graph_std{};
};

struct Dataset {
  std::vector<GraphRecord> records;
  std::vector<int> split;  // kTrainSplit / kValSplit, aligned with records
  FeatureStats stats;

  std::vector<int> indices_of(int which_split) const;
};

/// Stratified seeded split; class proportions match within one record.
/// Requires every class present to have at least 2 records when the fraction
/// is strictly between 0 and 1.
std::vector<int> make_split(const std::vector<Family>& labels, double val_fraction,
                            std::uint64_t seed);

/// Fills record node/graph features (parallel across records).
void compute_features(Dataset& dataset);

/// Fits standardization statistics on the training split.
FeatureStats compute_feature_stats(const Dataset& dataset);

struct Batch {
  Tensor node_feats;   // standardized
  Tensor graph_feats;  // standardized
  BatchedGraphStructure structure;
  std::vector<int> labels;          // class indices
  std::vector<int> record_indices;  // into dataset.records
};

Batch assemble_batch(const Dataset& dataset, const std::vector<int>& record_indices);

}  // namespace graphfam
