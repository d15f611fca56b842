#pragma once

#include <cstdint>
#include <vector>

#include "graphfam/graph.hpp"

namespace graphfam {

struct ErParams {
  int n = 0;
  double p = 0.0;
};

struct WsParams {
  int n = 0;
  int k = 0;  // even, 2 <= k < n
  double p = 0.0;
};

struct BaParams {
  int n = 0;
  int m = 0;  // edges per new node, 1 <= m < n
};

struct HkParams {
  int n = 0;
  int m = 0;
  double p_triad = 0.0;
};

struct SbmParams {
  std::vector<int> block_sizes;
  std::vector<std::vector<double>> probs;  // symmetric, entries in [0,1]
};

/// G(n,p): every node pair independently with probability p.
Graph generate_er(const ErParams& params, std::uint64_t seed);

/// Ring lattice with k nearest neighbours, each lattice edge rewired with
/// probability p in ascending (node, offset) order. Edge count is always nk/2.
Graph generate_ws(const WsParams& params, std::uint64_t seed);

/// Preferential attachment: m seed nodes, the first arrival connects to all of
/// them, later arrivals draw m distinct degree-proportional targets.
/// Edge count is always m(n-m).
Graph generate_ba(const BaParams& params, std::uint64_t seed);

/// BA with triad formation: after each node's first preferential edge, each
/// remaining edge is a triad step with probability p_triad (random neighbour
/// of the last preferential target), falling back to preferential attachment.
Graph generate_hk(const HkParams& params, std::uint64_t seed);

/// Blocks occupy contiguous id ranges; pair (u,v) in blocks (a,b) appears
/// independently with probability probs[a][b].
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

}  // namespace graphfam
