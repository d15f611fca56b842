#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphfam/gnn.hpp"
#include "graphfam/tensor.hpp"

namespace graphfam {

enum class Architecture { GCN = 0, GIN, GAT, GATv2, SAGE, GTN };

const char* architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);
const std::vector<Architecture>& all_architectures();

struct ModelConfig {
  Architecture arch = Architecture::GCN;
  int hidden = 64;
  double learning_rate = 1.5e-3;
  double dropout = 0.3;
  int node_feature_dim = 3;
  int graph_feature_dim = 3;
  int num_classes = 5;
};

/// Shared classification network: two architecture-specific convolutions with
/// ReLU/batch-norm/dropout, global mean pooling, graph-feature fusion, one
/// fully connected stage, and a linear output head. Embeddings are the
/// activations right before the output layer.
class GraphClassifier {
 public:
  GraphClassifier(const ModelConfig& config, std::uint64_t seed);

  struct Output {
    Value logits;      // batch x classes
    Value embeddings;  // batch x hidden
  };

  /// Node features must already be standardized. The structure must outlive
  /// the tape. Parameter leaf handles for the pass are kept for adam_update.
  Output forward(Tape& tape, const Tensor& node_feats, const Tensor& graph_feats,
                 const BatchedGraphStructure& structure, Mode mode,
                 std::mt19937_64& dropout_rng);

  /// Applies one Adam step to every parameter from the gradients of the last
  /// forward/backward pass on `tape`.
  void adam_update(Tape& tape, double lr);

  /// Tape leaf of parameter i from the most recent forward pass.
  Value leaf_of(std::size_t param_index) const { return leaves_.at(param_index); }

  const ModelConfig& config() const { return config_; }
  std::int64_t parameter_count() const;

  struct Snapshot {
    std::vector<Tensor> values;
    std::vector<Tensor> bn_stats;
  };
  Snapshot snapshot() const;
  void restore(const Snapshot& snap);

  /// Checkpoint as a flat binary tensor container plus a text index
  /// (name rows cols offset); running statistics are stored alongside.
  void save(const std::string& path_prefix) const;
  void load(const std::string& path_prefix);

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

 private:
  Value conv_forward(Tape& tape, Value x, const BatchedGraphStructure& structure,
                     int which);
  int add_param(const std::string& name, Tensor t);
  int find_param(const std::string& name) const;

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<int> conv_param_idx_[2];
  int fc_w_ = -1, fc_b_ = -1, out_w_ = -1, out_b_ = -1;
  int bn_gamma_[3] = {-1, -1, -1};
  int bn_beta_[3] = {-1, -1, -1};
  std::vector<BatchNormState> bn_states_;
  std::vector<Value> leaves_;  // param handles from the last forward
};

}  // namespace graphfam
