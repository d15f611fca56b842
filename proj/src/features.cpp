#include "graphfam/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "graphfam/parallel.hpp"

namespace graphfam {

EigenvectorResult eigenvector_centrality(const Graph& g, double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("eigenvector: tol must be positive");
  if (!is_connected(g))
    throw std::invalid_argument("eigenvector: graph must be connected");
  const int n = g.num_nodes();
  EigenvectorResult res;
  res.scores.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> next(n);
  for (int it = 1; it <= max_iter; ++it) {
    for (int u = 0; u < n; ++u) {
      double acc = res.scores[u];  // +I shift keeps bipartite spectra contracting
      for (int v : g.neighbors(u)) acc += res.scores[v];
      next[u] = acc;
    }
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    double diff = 0.0;
    for (int u = 0; u < n; ++u) {
      next[u] /= norm;
      diff = std::max(diff, std::abs(next[u] - res.scores[u]));
    }
    res.scores.swap(next);
    res.iterations = it;
    if (diff < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

std::vector<double> closeness_centrality(const Graph& g) {
  if (!is_connected(g))
    throw std::invalid_argument("closeness: graph must be connected");
  const int n = g.num_nodes();
  std::vector<double> scores(n, 0.0);
  if (n <= 1) return scores;
  parallel_for(n, 16, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t s = begin; s < end; ++s) {
      auto dist = bfs_distances(g, static_cast<int>(s));
      std::int64_t sum = 0;
      for (int d : dist) sum += d;
      scores[static_cast<std::size_t>(s)] = static_cast<double>(n - 1) / static_cast<double>(sum);
    }
  });
  return scores;
}

double degree_variance(const Graph& g) {
  const int n = g.num_nodes();
  if (n < 1) throw std::invalid_argument("degree_variance: empty graph");
  double mean = 2.0 * static_cast<double>(g.num_edges()) / n;
  double acc = 0.0;
  for (int u = 0; u < n; ++u) {
    double d = g.degree(u) - mean;
    acc += d * d;
  }
  return acc / n;
}

namespace {

// Triangles through each node, by sorted-neighbor-list intersection per edge.
std::vector<std::int64_t> triangle_counts(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<std::int64_t> tri(n, 0);
  for (int u = 0; u < n; ++u) {
    auto nu = g.neighbors(u);
    for (int v : nu) {
      if (v <= u) continue;
      auto nv = g.neighbors(v);
      std::size_t i = 0, j = 0;
      while (i < nu.size() && j < nv.size()) {
        if (nu[i] < nv[j]) {
          ++i;
        } else if (nu[i] > nv[j]) {
          ++j;
        } else {
          int w = nu[i];
          if (w > v) {  // count each triangle once at its smallest edge
            ++tri[u];
            ++tri[v];
            ++tri[w];
          }
          ++i;
          ++j;
        }
      }
    }
  }
  return tri;
}

}  // namespace

std::vector<double> local_clustering(const Graph& g) {
  const int n = g.num_nodes();
  auto tri = triangle_counts(g);
  std::vector<double> c(n, 0.0);
  for (int u = 0; u < n; ++u) {
    std::int64_t d = g.degree(u);
    if (d >= 2) c[u] = 2.0 * static_cast<double>(tri[u]) / (static_cast<double>(d) * (d - 1));
  }
  return c;
}

double average_clustering(const Graph& g) {
  if (g.num_nodes() < 1) throw std::invalid_argument("average_clustering: empty graph");
  auto c = local_clustering(g);
  double acc = 0.0;
  for (double x : c) acc += x;
  return acc / g.num_nodes();
}

double transitivity(const Graph& g) {
  auto tri = triangle_counts(g);
  std::int64_t closed = 0, triples = 0;
  for (int u = 0; u < g.num_nodes(); ++u) {
    closed += tri[u];
    std::int64_t d = g.degree(u);
    triples += d * (d - 1) / 2;
  }
  if (triples == 0) return 0.0;
  return static_cast<double>(closed) / static_cast<double>(triples);
}

AssortativityResult degree_assortativity(const Graph& g) {
  if (g.num_edges() < 1)
    throw std::invalid_argument("assortativity: graph has no edges");
  // Integer sums over both orderings of every edge keep the zero-variance
  // test exact.
  std::int64_t n_pairs = 2 * g.num_edges();
  std::int64_t sx = 0, sxx = 0, sxy = 0;
  for (int u = 0; u < g.num_nodes(); ++u) {
    std::int64_t du = g.degree(u);
    sx += du * du;  // u appears as endpoint in du ordered pairs
    sxx += du * du * du;
    for (int v : g.neighbors(u)) sxy += du * static_cast<std::int64_t>(g.degree(v));
  }
  std::int64_t num = n_pairs * sxy - sx * sx;
  std::int64_t den = n_pairs * sxx - sx * sx;
  if (den == 0) return {0.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

double density(const Graph& g) {
  const double n = g.num_nodes();
  if (n < 2) return 0.0;
  return 2.0 * static_cast<double>(g.num_edges()) / (n * (n - 1));
}

std::vector<int> core_numbers(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<int> deg(n), core(n, 0);
  int max_deg = 0;
  for (int u = 0; u < n; ++u) {
    deg[u] = g.degree(u);
    max_deg = std::max(max_deg, deg[u]);
  }
  // Batagelj-Zaversnik peeling with bucketed degree order.
  std::vector<int> bin(max_deg + 2, 0), pos(n), order(n);
  for (int u = 0; u < n; ++u) ++bin[deg[u]];
  int start = 0;
  for (int d = 0; d <= max_deg; ++d) {
    int count = bin[d];
    bin[d] = start;
    start += count;
  }
  for (int u = 0; u < n; ++u) {
    pos[u] = bin[deg[u]]++;
    order[pos[u]] = u;
  }
  for (int d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  bin[0] = 0;
  for (int i = 0; i < n; ++i) {
    int u = order[i];
    core[u] = deg[u];
    for (int v : g.neighbors(u)) {
      if (deg[v] > deg[u]) {
        int dv = deg[v], pv = pos[v];
        int pw = bin[dv];
        int w = order[pw];
        if (v != w) {
          std::swap(order[pv], order[pw]);
          pos[v] = pw;
          pos[w] = pv;
        }
        ++bin[dv];
        --deg[v];
      }
    }
  }
  return core;
}

const std::array<std::string, kNodeFeatureCount>& node_feature_names() {
  static const std::array<std::string, kNodeFeatureCount> names = {
      "eigenvector_centrality", "degree", "closeness"};
  return names;
}

std::vector<std::array<double, kNodeFeatureCount>> node_features(const Graph& g) {
  auto eig = eigenvector_centrality(g);
  auto close = closeness_centrality(g);
  std::vector<std::array<double, kNodeFeatureCount>> rows(g.num_nodes());
  for (int u = 0; u < g.num_nodes(); ++u)
    rows[u] = {eig.scores[u], static_cast<double>(g.degree(u)), close[u]};
  return rows;
}

const std::array<std::string, kGraphFeatureCount>& graph_feature_names() {
  static const std::array<std::string, kGraphFeatureCount> names = {
      "degree_variance", "clustering", "assortativity"};
  return names;
}

GraphFeatures graph_features(const Graph& g) {
  GraphFeatures f;
  f.degree_variance = degree_variance(g);
  f.clustering = average_clustering(g);
  auto a = degree_assortativity(g);
  f.assortativity = a.value;
  f.assortativity_degenerate = a.degenerate;
  return f;
}

const std::array<std::string, kCandidateFeatureCount>& candidate_feature_names() {
  static const std::array<std::string, kCandidateFeatureCount> names = {
      "mean_eigenvector_centrality",
      "mean_degree",
      "mean_closeness",
      "mean_clustering",
      "degree_variance",
      "transitivity",
      "assortativity",
      "density",
      "max_degree_frac",
      "mean_core_number"};
  return names;
}

std::array<double, kCandidateFeatureCount> candidate_row(const Graph& g) {
  const int n = g.num_nodes();
  auto mean = [n](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / n;
  };
  auto eig = eigenvector_centrality(g);
  auto close = closeness_centrality(g);
  auto clust = local_clustering(g);
  auto cores = core_numbers(g);
  double mean_core = 0.0;
  for (int c : cores) mean_core += c;
  mean_core /= n;
  int max_deg = 0;
  for (int u = 0; u < n; ++u) max_deg = std::max(max_deg, g.degree(u));
  return {mean(eig.scores),
          2.0 * static_cast<double>(g.num_edges()) / n,
          mean(close),
          mean(clust),
          degree_variance(g),
          transitivity(g),
          degree_assortativity(g).value,
          density(g),
          static_cast<double>(max_deg) / n,
          mean_core};
}

std::vector<std::array<double, kCandidateFeatureCount>> compute_candidate_table(
    const std::vector<const Graph*>& graphs) {
  std::vector<std::array<double, kCandidateFeatureCount>> rows(graphs.size());
  parallel_for(static_cast<std::int64_t>(graphs.size()), 1,
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i)
                   rows[static_cast<std::size_t>(i)] = candidate_row(*graphs[static_cast<std::size_t>(i)]);
               });
  return rows;
}

}  // namespace graphfam
