#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>
#include <random>

#include "graphfam/features.hpp"
#include "graphfam/generators.hpp"
#include "oracles.hpp"

using namespace graphfam;

namespace {

Graph star5() { return Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}); }

Graph permuted(const Graph& g, const std::vector<int>& perm) {
  std::vector<std::pair<int, int>> edges;
  for (auto [u, v] : g.edges()) {
    int pu = perm[u], pv = perm[v];
    edges.emplace_back(std::min(pu, pv), std::max(pu, pv));
  }
  return Graph::from_edges(g.num_nodes(), edges);
}

}  // namespace

TEST_CASE("eigenvector centrality closed forms") {
  auto kn = eigenvector_centrality(generate_er({6, 1.0}, 1));
  for (double s : kn.scores) CHECK(s == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-9));

  auto path = eigenvector_centrality(Graph::from_edges(3, {{0, 1}, {1, 2}}));
  CHECK(path.scores[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(path.scores[1] == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-8));
  CHECK(path.scores[2] == doctest::Approx(0.5).epsilon(1e-8));

  auto star = eigenvector_centrality(star5());
  CHECK(star.scores[0] / star.scores[1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(star.converged);
}

TEST_CASE("eigenvector centrality matches the dense eigensolver") {
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = oracles::random_connected_graph(40, 0.12, 100 + trial, 10);
    auto mine = eigenvector_centrality(g, 1e-13, 20000);
    auto oracle = oracles::principal_eigenvector(g);
    REQUIRE(mine.converged);
    for (int u = 0; u < g.num_nodes(); ++u)
      CHECK(std::abs(mine.scores[u] - oracle[u]) < 1e-9);
  }
}

TEST_CASE("eigenvector centrality rejects disconnected graphs") {
  Graph two = Graph::from_edges(4, {{0, 1}, {2, 3}});
  CHECK_THROWS_AS(eigenvector_centrality(two), std::invalid_argument);
  CHECK_THROWS_AS(eigenvector_centrality(star5(), 0.0), std::invalid_argument);
}

TEST_CASE("eigenvector centrality is permutation equivariant") {
  Graph g = oracles::random_connected_graph(30, 0.15, 77, 10);
  std::vector<int> perm(g.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto base = eigenvector_centrality(g, 1e-12, 10000);
  auto moved = eigenvector_centrality(permuted(g, perm), 1e-12, 10000);
  for (int u = 0; u < g.num_nodes(); ++u)
    CHECK(moved.scores[perm[u]] == doctest::Approx(base.scores[u]).epsilon(1e-8));
}

TEST_CASE("closeness centrality") {
  for (double s : closeness_centrality(generate_er({7, 1.0}, 1)))
    CHECK(s == doctest::Approx(1.0));
  auto path = closeness_centrality(Graph::from_edges(3, {{0, 1}, {1, 2}}));
  CHECK(path[0] == doctest::Approx(2.0 / 3.0));
  CHECK(path[1] == doctest::Approx(1.0));
  CHECK(path[2] == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(closeness_centrality(Graph::from_edges(4, {{0, 1}, {2, 3}})),
                  std::invalid_argument);
}

TEST_CASE("closeness matches the all-pairs oracle") {
  Graph g = oracles::random_connected_graph(100, 0.08, 11, 60);
  auto mine = closeness_centrality(g);
  auto dist = oracles::floyd_warshall(g);
  for (int u = 0; u < g.num_nodes(); ++u) {
    double sum = 0.0;
    for (int v = 0; v < g.num_nodes(); ++v) sum += dist[u][v];
    CHECK(std::abs(mine[u] - (g.num_nodes() - 1) / sum) < 1e-12);
  }
}

TEST_CASE("degree variance") {
  CHECK(degree_variance(generate_ws({12, 4, 0.0}, 1)) == 0.0);  // 4-regular
  CHECK(degree_variance(star5()) == doctest::Approx(1.44));
  CHECK(degree_variance(Graph::from_edges(3, {{0, 1}, {1, 2}})) ==
        doctest::Approx(2.0 / 9.0));
}

TEST_CASE("average clustering") {
  Graph triangle = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(average_clustering(triangle) == doctest::Approx(1.0));
  CHECK(average_clustering(star5()) == doctest::Approx(0.0));
  Graph k4_minus = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
  CHECK(average_clustering(k4_minus) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("local clustering matches enumeration on random graphs") {
  for (int trial = 0; trial < 8; ++trial) {
    Graph g = generate_er({45, 0.15}, 500 + trial);
    auto mine = local_clustering(g);
    auto oracle = oracles::clustering_by_enumeration(g);
    for (int u = 0; u < g.num_nodes(); ++u)
      CHECK(mine[u] == doctest::Approx(oracle[u]).epsilon(1e-12));
    double avg = average_clustering(g);
    CHECK(avg >= 0.0);
    CHECK(avg <= 1.0);
  }
}

TEST_CASE("assortativity closed forms and degeneracy") {
  auto star = degree_assortativity(star5());
  CHECK_FALSE(star.degenerate);
  CHECK(star.value == doctest::Approx(-1.0));

  auto k4 = degree_assortativity(generate_er({4, 1.0}, 1));
  CHECK(k4.degenerate);
  CHECK(k4.value == 0.0);

  auto path4 = degree_assortativity(Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}}));
  CHECK(path4.value == doctest::Approx(-0.5));

  CHECK_THROWS_AS(degree_assortativity(Graph::from_edges(3, {})), std::invalid_argument);
}

TEST_CASE("assortativity matches the pearson oracle") {
  for (int trial = 0; trial < 8; ++trial) {
    Graph g = generate_er({40, 0.12}, 900 + trial);
    if (g.num_edges() < 1) continue;
    std::vector<double> xs, ys;
    for (int u = 0; u < g.num_nodes(); ++u) {
      for (int v : g.neighbors(u)) {
        xs.push_back(g.degree(u));
        ys.push_back(g.degree(v));
      }
    }
    auto mine = degree_assortativity(g);
    if (mine.degenerate) continue;
    CHECK(mine.value == doctest::Approx(oracles::pearson(xs, ys)).epsilon(1e-10));
    CHECK(mine.value >= -1.0);
    CHECK(mine.value <= 1.0);
  }
}

TEST_CASE("core numbers") {
  // Triangle with a pendant vertex: triangle is the 2-core, the tail is 1-core.
  Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
  CHECK(core_numbers(g) == std::vector<int>{2, 2, 2, 1});
  CHECK(core_numbers(generate_er({5, 1.0}, 1)) == std::vector<int>(5, 4));
}

TEST_CASE("candidate table") {
  Graph triangle = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  auto row = candidate_row(triangle);
  const auto& names = candidate_feature_names();
  REQUIRE(names.size() == kCandidateFeatureCount);
  auto col = [&](const std::string& name) {
    for (int c = 0; c < kCandidateFeatureCount; ++c) {
      if (names[c] == name) return row[c];
    }
    FAIL("missing column ", name);
    return 0.0;
  };
  CHECK(col("density") == doctest::Approx(1.0));
  CHECK(col("transitivity") == doctest::Approx(1.0));
  CHECK(col("degree_variance") == doctest::Approx(0.0));
  CHECK(col("mean_degree") == doctest::Approx(2.0));

  Graph other = oracles::random_connected_graph(25, 0.2, 4, 10);
  auto table = compute_candidate_table({&triangle, &other});
  REQUIRE(table.size() == 2);
  CHECK(table[0] == candidate_row(triangle));
  CHECK(table[1] == candidate_row(other));
}

TEST_CASE("graph-level features are permutation invariant") {
  Graph g = oracles::random_connected_graph(30, 0.15, 21, 10);
  std::vector<int> perm(g.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(17);
  std::shuffle(perm.begin(), perm.end(), rng);
  Graph h = permuted(g, perm);
  CHECK(degree_variance(h) == doctest::Approx(degree_variance(g)).epsilon(1e-12));
  CHECK(average_clustering(h) == doctest::Approx(average_clustering(g)).epsilon(1e-12));
  CHECK(transitivity(h) == doctest::Approx(transitivity(g)).epsilon(1e-12));
  CHECK(degree_assortativity(h).value ==
        doctest::Approx(degree_assortativity(g).value).epsilon(1e-12));
}

TEST_CASE("features stay finite on a 2000-node graph") {
  Graph g = generate_ba({2000, 3}, 12);
  auto nf = node_features(g);
  for (const auto& row : nf) {
    for (double v : row) CHECK(std::isfinite(v));
  }
  auto gf = graph_features(g);
  for (double v : gf.values()) CHECK(std::isfinite(v));
  for (double v : candidate_row(g)) CHECK(std::isfinite(v));
}
