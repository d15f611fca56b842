#include "graphfam/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "graphfam/rng.hpp"

namespace graphfam {
namespace {

// Appends, for every pair in a lexicographically ordered pair range of given
// length, the pair indices kept by an independent Bernoulli(p) draw. Geometric
// skipping touches only the kept pairs.
void sample_pair_indices(std::int64_t total, double p, std::mt19937_64& rng,
                         std::vector<std::int64_t>& kept) {
  if (total <= 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::int64_t i = 0; i < total; ++i) kept.push_back(i);
    return;
  }
  const double log1mp = std::log1p(-p);
  std::int64_t idx = -1;
  while (true) {
    double r = uniform01(rng);
    idx += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log1mp));
    if (idx >= total) break;
    kept.push_back(idx);
  }
}

}  // namespace

Graph generate_er(const ErParams& params, std::uint64_t seed) {
  if (params.n < 1) throw std::invalid_argument("er: n must be >= 1");
  if (!(params.p >= 0.0 && params.p <= 1.0))
    throw std::invalid_argument("er: p must be in [0,1]");
  const int n = params.n;
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> kept;
  const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
  kept.reserve(static_cast<std::size_t>(static_cast<double>(total) * params.p * 1.1) + 16);
  sample_pair_indices(total, params.p, rng, kept);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(kept.size());
  // Walk rows in step with the sorted indices: row u covers n-1-u pairs.
  int u = 0;
  std::int64_t row_start = 0;
  for (std::int64_t idx : kept) {
    while (idx >= row_start + (n - 1 - u)) {
      row_start += n - 1 - u;
      ++u;
    }
    edges.emplace_back(u, u + 1 + static_cast<int>(idx - row_start));
  }
  return Graph::from_edges(n, edges);
}

Graph generate_ws(const WsParams& params, std::uint64_t seed) {
  const int n = params.n, k = params.k;
  if (n < 1) throw std::invalid_argument("ws: n must be >= 1");
  if (k < 2 || k % 2 != 0 || k >= n)
    throw std::invalid_argument("ws: k must be even with 2 <= k < n");
  if (!(params.p >= 0.0 && params.p <= 1.0))
    throw std::invalid_argument("ws: p must be in [0,1]");
  std::mt19937_64 rng(seed);
  std::vector<std::set<int>> adj(n);
  auto add = [&](int a, int b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  auto remove = [&](int a, int b) {
    adj[a].erase(b);
    adj[b].erase(a);
  };
  for (int i = 0; i < n; ++i) {
    for (int off = 1; off <= k / 2; ++off) add(i, (i + off) % n);
  }
  // Rewire in ascending (node, offset) order; the far endpoint moves to a
  // uniformly random node, rejecting self-loops and existing edges.
  for (int i = 0; i < n; ++i) {
    for (int off = 1; off <= k / 2; ++off) {
      int j = (i + off) % n;
      if (uniform01(rng) >= params.p) continue;
      if (static_cast<int>(adj[i].size()) >= n - 1) continue;  // saturated node
      int w;
      do {
        w = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
      } while (w == i || adj[i].count(w));
      remove(i, j);
      add(i, w);
    }
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * k / 2);
  for (int i = 0; i < n; ++i) {
    for (int j : adj[i]) {
      if (i < j) edges.emplace_back(i, j);
    }
  }
  return Graph::from_edges(n, edges);
}

namespace {

// Shared BA/HK construction; p_triad == 0 is exactly Barabasi-Albert and the
// triad coin is only drawn when p_triad > 0 so both paths share seed streams.
Graph preferential_attachment(int n, int m, double p_triad, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> adj(n);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m) * (n - m));
  std::vector<int> endpoints;  // one entry per edge endpoint; drives degree-proportional draws
  endpoints.reserve(2 * static_cast<std::size_t>(m) * (n - m));
  auto connected = [&](int a, int b) {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  };
  auto add_edge = [&](int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
    edges.emplace_back(a, b);
  };
  // Bootstrap: the first arrival connects to every seed node.
  for (int t = 0; t < m; ++t) {
    add_edge(m, t);
    endpoints.push_back(t);
  }
  endpoints.insert(endpoints.end(), static_cast<std::size_t>(m), m);
  for (int source = m + 1; source < n; ++source) {
    auto draw_preferential = [&]() {
      while (true) {
        int cand = endpoints[uniform_index(rng, endpoints.size())];
        if (cand != source && !connected(source, cand)) return cand;
      }
    };
    int target = draw_preferential();
    add_edge(source, target);
    endpoints.push_back(target);
    for (int e = 1; e < m; ++e) {
      if (p_triad > 0.0 && uniform01(rng) < p_triad) {
        std::vector<int> candidates;
        for (int nbr : adj[target]) {
          if (nbr != source && !connected(source, nbr)) candidates.push_back(nbr);
        }
        if (!candidates.empty()) {
          int nbr = candidates[uniform_index(rng, candidates.size())];
          add_edge(source, nbr);
          endpoints.push_back(nbr);
          continue;
        }
      }
      target = draw_preferential();
      add_edge(source, target);
      endpoints.push_back(target);
    }
    endpoints.insert(endpoints.end(), static_cast<std::size_t>(m), source);
  }
  return Graph::from_edges(n, edges);
}

}  // namespace

Graph generate_ba(const BaParams& params, std::uint64_t seed) {
  if (params.m < 1) throw std::invalid_argument("ba: m must be >= 1");
  if (params.n <= params.m) throw std::invalid_argument("ba: n must exceed m");
  return preferential_attachment(params.n, params.m, 0.0, seed);
}

Graph generate_hk(const HkParams& params, std::uint64_t seed) {
  if (params.m < 1) throw std::invalid_argument("hk: m must be >= 1");
  if (params.n <= params.m) throw std::invalid_argument("hk: n must exceed m");
  if (!(params.p_triad >= 0.0 && params.p_triad <= 1.0))
    throw std::invalid_argument("hk: p_triad must be in [0,1]");
  return preferential_attachment(params.n, params.m, params.p_triad, seed);
}

Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
  const std::size_t blocks = params.block_sizes.size();
  if (blocks == 0) throw std::invalid_argument("sbm: no blocks");
  if (params.probs.size() != blocks)
    throw std::invalid_argument("sbm: probability matrix dimension mismatch");
  std::int64_t n64 = 0;
  for (int s : params.block_sizes) {
    if (s <= 0) throw std::invalid_argument("sbm: block sizes must be positive");
    n64 += s;
  }
  for (std::size_t a = 0; a < blocks; ++a) {
    if (params.probs[a].size() != blocks)
      throw std::invalid_argument("sbm: probability matrix dimension mismatch");
    for (std::size_t b = 0; b < blocks; ++b) {
      double p = params.probs[a][b];
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("sbm: probabilities must be in [0,1]");
      if (params.probs[a][b] != params.probs[b][a])
        throw std::invalid_argument("sbm: probability matrix must be symmetric");
    }
  }
  const int n = static_cast<int>(n64);
  std::vector<int> block_start(blocks + 1, 0);
  for (std::size_t b = 0; b < blocks; ++b)
    block_start[b + 1] = block_start[b] + params.block_sizes[b];

  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  std::vector<std::int64_t> kept;
  for (std::size_t a = 0; a < blocks; ++a) {
    for (std::size_t b = a; b < blocks; ++b) {
      const int sa = params.block_sizes[a], sb = params.block_sizes[b];
      const int base_a = block_start[a], base_b = block_start[b];
      kept.clear();
      if (a == b) {
        const std::int64_t total = static_cast<std::int64_t>(sa) * (sa - 1) / 2;
        sample_pair_indices(total, params.probs[a][b], rng, kept);
        int u = 0;
        std::int64_t row_start = 0;
        for (std::int64_t idx : kept) {
          while (idx >= row_start + (sa - 1 - u)) {
            row_start += sa - 1 - u;
            ++u;
          }
          edges.emplace_back(base_a + u, base_a + u + 1 + static_cast<int>(idx - row_start));
        }
      } else {
        const std::int64_t total = static_cast<std::int64_t>(sa) * sb;
        sample_pair_indices(total, params.probs[a][b], rng, kept);
        for (std::int64_t idx : kept) {
          edges.emplace_back(base_a + static_cast<int>(idx / sb),
                             base_b + static_cast<int>(idx % sb));
        }
      }
    }
  }
  return Graph::from_edges(n, edges);
}

}  // namespace graphfam
