#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "graphfam/graph.hpp"
#include "graphfam/tensor.hpp"

namespace graphfam {

/// Block-diagonal structure of a batch of graphs with the precomputed
/// operators every convolution needs. Immutable once built; must outlive any
/// tape referencing it.
struct BatchedGraphStructure {
  int num_nodes = 0;
  int num_graphs = 0;
  std::vector<int> graph_of_node;  // non-decreasing
  std::vector<int> graph_offsets;  // size num_graphs + 1

  // Neighborhoods including the node itself (self entry first), used by the
  // local attention convolutions.
  std::vector<std::int64_t> self_nbr_ptr;
  std::vector<int> self_nbr;

  SparseOp gcn_norm;  // D^-1/2 (A+I) D^-1/2, symmetric
  SparseOp adjacency; // plain A, symmetric; GIN sum aggregation
  SparseOp mean_nbr;  // row-normalized A (zero rows for isolated nodes)
  SparseOp mean_nbr_t;

  static BatchedGraphStructure build(const std::vector<const Graph*>& graphs);
};

/// Uniform neighbor subsampling for SAGE: mean over min(sample_size, deg)
/// distinct neighbors. Returns the operator and its transpose.
std::pair<SparseOp, SparseOp> sampled_mean_operator(const BatchedGraphStructure& s,
                                                    int sample_size,
                                                    std::mt19937_64& rng);

// Architecture-specific convolutions. All return pre-activation embeddings;
// the scaffold applies the shared ReLU.

/// X' = D^-1/2 (A+I) D^-1/2 X Theta.
Value gcn_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta);

/// Attention over N(i) and i with scores LeakyReLU(a^T [Th x_i || Th x_j]);
/// attn is 1 x 2H (left half scores the target, right half the source).
Value gat_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta,
               Value attn, double leaky_slope = 0.2);

/// GATv2 scoring a^T LeakyReLU(W_l x_i + W_r x_j); aggregation of W_r x_j.
Value gatv2_conv(Tape& tape, Value x, const BatchedGraphStructure& s,
                 Value theta_l, Value theta_r, Value attn, double leaky_slope = 0.2);

/// X'_i = Theta [x_i || mean of neighbors]; isolated nodes use a zero mean.
/// Pass a sampled operator pair to subsample neighborhoods.
Value sage_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta);
Value sage_conv_with_operator(Tape& tape, Value x, const BatchedGraphStructure& s,
                              const SparseOp& mean_op, const SparseOp& mean_op_t,
                              Value theta);

/// X'_i = MLP((1 + eps) x_i + sum of neighbors); two affine layers with ReLU.
Value gin_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value w1,
               Value b1, Value w2, Value b2, Value eps);

/// Scaled dot-product attention over all nodes of the same graph;
/// X'_i = sum_j softmax_j((Q_i . K_j)/sqrt(d)) V_j.
Value gtn_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta_q,
               Value theta_k, Value theta_v);

}  // namespace graphfam
