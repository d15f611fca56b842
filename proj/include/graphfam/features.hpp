#pragma once

#include <array>
#include <string>
#include <vector>

#include "graphfam/graph.hpp"

namespace graphfam {

struct EigenvectorResult {
  std::vector<double> scores;  // non-negative, unit Euclidean norm
  bool converged = false;
  int iterations = 0;
};

/// Principal-eigenvector scores of the adjacency operator by power iteration
/// (shifted by +I so bipartite graphs converge). Requires a connected graph.
EigenvectorResult eigenvector_centrality(const Graph& g, double tol = 1e-10,
                                         int max_iter = 1000);

/// Normalized closeness (n-1) / sum of hop distances. Requires connectivity.
std::vector<double> closeness_centrality(const Graph& g);

/// Population variance of the degree sequence.
double degree_variance(const Graph& g);

/// Per-node local clustering coefficients; 0 for degree < 2.
std::vector<double> local_clustering(const Graph& g);

/// Mean of the local clustering coefficients.
double average_clustering(const Graph& g);

/// Global transitivity 3*triangles / open-triple count; 0 when no triples.
double transitivity(const Graph& g);

struct AssortativityResult {
  double value = 0.0;
  bool degenerate = false;  // zero endpoint-degree variance (e.g. regular graphs)
};

/// Pearson correlation of endpoint degrees over both orderings of every edge.
/// Requires at least one edge.
AssortativityResult degree_assortativity(const Graph& g);

double density(const Graph& g);

/// Core number per node (largest k such that the node is in the k-core).
std::vector<int> core_numbers(const Graph& g);

/// Node feature columns fed to the models, in order.
inline constexpr int kNodeFeatureCount = 3;
const std::array<std::string, kNodeFeatureCount>& node_feature_names();

/// Rows = nodes, columns = (eigenvector_centrality, degree, closeness).
std::vector<std::array<double, kNodeFeatureCount>> node_features(const Graph& g);

/// Graph feature columns fed to the models, in order.
inline constexpr int kGraphFeatureCount = 3;
const std::array<std::string, kGraphFeatureCount>& graph_feature_names();

struct GraphFeatures {
  double degree_variance = 0.0;
  double clustering = 0.0;     // average local clustering
  double assortativity = 0.0;  // 0 when degenerate
  bool assortativity_degenerate = false;

  std::array<double, kGraphFeatureCount> values() const {
    return {degree_variance, clustering, assortativity};
  }
};

GraphFeatures graph_features(const Graph& g);

/// Candidate columns entering feature selection (node features as per-graph
/// means), in a fixed order.
inline constexpr int kCandidateFeatureCount = 10;
const std::array<std::string, kCandidateFeatureCount>& candidate_feature_names();

std::array<double, kCandidateFeatureCount> candidate_row(const Graph& g);

/// One row per graph, input order preserved. Parallel across graphs.
std::vector<std::array<double, kCandidateFeatureCount>> compute_candidate_table(
    const std::vector<const Graph*>& graphs);

}  // namespace graphfam
