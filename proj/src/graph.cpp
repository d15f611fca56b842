#include "graphfam/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace graphfam {

const Family kReportOrder[kNumFamilies] = {Family::ER, Family::BA, Family::WS,
                                           Family::SBM, Family::HK};

const char* family_name(Family f) {
  switch (f) {
    case Family::ER: return "ER";
    case Family::WS: return "WS";
    case Family::BA: return "BA";
    case Family::HK: return "HK";
    case Family::SBM: return "SBM";
  }
  throw std::invalid_argument("unknown family");
}

Family family_from_name(const std::string& name) {
  for (int i = 0; i < kNumFamilies; ++i) {
    Family f = static_cast<Family>(i);
    if (name == family_name(f)) return f;
  }
  throw std::invalid_argument("unknown family name: " + name);
}

int report_index(Family f) {
  for (int i = 0; i < kNumFamilies; ++i) {
    if (kReportOrder[i] == f) return i;
  }
  throw std::invalid_argument("unknown family");
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 0) throw std::invalid_argument("negative node count");
  std::vector<int> deg(n, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loop");
    ++deg[u];
    ++deg[v];
  }
  Graph g;
  g.n_ = n;
  g.m_ = static_cast<std::int64_t>(edges.size());
  g.offsets_.assign(n + 1, 0);
  for (int u = 0; u < n; ++u) g.offsets_[u + 1] = g.offsets_[u] + deg[u];
  g.adj_.resize(static_cast<std::size_t>(g.offsets_[n]));
  std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    g.adj_[static_cast<std::size_t>(cursor[u]++)] = v;
    g.adj_[static_cast<std::size_t>(cursor[v]++)] = u;
  }
  for (int u = 0; u < n; ++u) {
    auto first = g.adj_.begin() + g.offsets_[u];
    auto last = g.adj_.begin() + g.offsets_[u + 1];
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last)
      throw std::invalid_argument("duplicate edge");
  }
  return g;
}

bool Graph::has_edge(int u, int v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(m_));
  for (int u = 0; u < n_; ++u) {
    for (int v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  if (source < 0 || source >= g.num_nodes())
    throw std::invalid_argument("bfs source out of range");
  std::vector<int> dist(g.num_nodes(), kUnreachable);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> components;
  std::vector<bool> seen(n, false);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp;
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

Graph largest_connected_subgraph(const Graph& g) {
  if (g.num_nodes() == 0)
    throw std::invalid_argument("largest_connected_subgraph on empty graph");
  auto components = connected_components(g);
  // Components are ordered by minimum id, so the first of maximal size wins ties.
  const std::vector<int>* best = &components[0];
  for (const auto& c : components) {
    if (c.size() > best->size()) best = &c;
  }
  std::vector<int> relabel(g.num_nodes(), -1);
  for (std::size_t i = 0; i < best->size(); ++i) relabel[(*best)[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  for (int u : *best) {
    for (int v : g.neighbors(u)) {
      if (u < v && relabel[v] >= 0) edges.emplace_back(relabel[u], relabel[v]);
    }
  }
  return Graph::from_edges(static_cast<int>(best->size()), edges);
}

std::vector<int> degree_sequence(const Graph& g) {
  std::vector<int> deg(g.num_nodes());
  for (int u = 0; u < g.num_nodes(); ++u) deg[u] = g.degree(u);
  return deg;
}

bool is_connected(const Graph& g) {
  if (g.num_nodes() == 0) return true;
  auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](int d) { return d == kUnreachable; });
}

void write_graph(std::ostream& out, const Graph& g, Family family, std::uint64_t seed) {
  out << g.num_nodes() << ' ' << g.num_edges() << ' ' << family_name(family) << ' '
      << seed << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void write_graph_file(const std::string& path, const Graph& g, Family family,
                      std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_graph(out, g, family, seed);
  if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedGraph read_graph(std::istream& in) {
  int n = 0;
  std::int64_t m = 0;
  std::string fam;
  std::uint64_t seed = 0;
  if (!(in >> n >> m >> fam >> seed)) throw std::runtime_error("bad graph header");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    int u = 0, v = 0;
    if (!(in >> u >> v)) throw std::runtime_error("truncated graph edge list");
    edges.emplace_back(u, v);
  }
  return {Graph::from_edges(n, edges), family_from_name(fam), seed};
}

LoadedGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_graph(in);
}

}  // namespace graphfam
