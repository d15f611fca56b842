#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace graphfam {

/// The five generative families, in the frozen class-index order.
enum class Family : int { ER = 0, WS = 1, BA = 2, HK = 3, SBM = 4 };

constexpr int kNumFamilies = 5;

const char* family_name(Family f);
Family family_from_name(const std::string& name);

/// Class order used in confusion matrices and metric tables (ER, BA, WS, SBM, HK).
extern const Family kReportOrder[kNumFamilies];

/// Position of a family in the report order.
int report_index(Family f);

/// Immutable undirected simple graph with dense node ids 0..n-1.
/// Adjacency is stored in compressed-row form with sorted neighbor lists.
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list. Throws std::invalid_argument on self-loops,
  /// duplicate edges, or out-of-range endpoints.
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

  int num_nodes() const { return n_; }
  std::int64_t num_edges() const { return m_; }

  std::span<const int> neighbors(int u) const {
    return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
  }
  int degree(int u) const { return static_cast<int>(offsets_[u + 1] - offsets_[u]); }
  bool has_edge(int u, int v) const;

  /// Edges as (u, v) with u < v, sorted lexicographically.
  std::vector<std::pair<int, int>> edges() const;

 private:
  int n_ = 0;
  std::int64_t m_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<int> adj_;
};

constexpr int kUnreachable = -1;

/// Hop distances from source; kUnreachable for nodes in other components.
std::vector<int> bfs_distances(const Graph& g, int source);

/// Maximal connected components, ordered by their minimum node id.
std::vector<std::vector<int>> connected_components(const Graph& g);

/// Largest component as a new graph with ids relabeled 0..k-1 in ascending
/// original-id order. Ties on size go to the component with the lowest
/// minimum original id.
Graph largest_connected_subgraph(const Graph& g);

std::vector<int> degree_sequence(const Graph& g);

bool is_connected(const Graph& g);

/// On-disk format: header "n m family seed", then m lines "u v" with u < v,
/// sorted lexicographically.
void write_graph(std::ostream& out, const Graph& g, Family family, std::uint64_t seed);
void write_graph_file(const std::string& path, const Graph& g, Family family, std::uint64_t seed);

struct LoadedGraph {
  Graph graph;
  Family family;
  std::uint64_t seed;
};

LoadedGraph read_graph(std::istream& in);
LoadedGraph read_graph_file(const std::string& path);

}  // namespace graphfam
