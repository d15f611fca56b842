#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "graphfam/generators.hpp"
#include "graphfam/graph.hpp"
#include "oracles.hpp"

using namespace graphfam;

namespace {

Graph path3() { return Graph::from_edges(3, {{0, 1}, {1, 2}}); }

Graph k4() {
  return Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

}  // namespace

TEST_CASE("from_edges rejects malformed input") {
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("bfs distances on small graphs") {
  CHECK(bfs_distances(path3(), 0) == std::vector<int>{0, 1, 2});
  CHECK(bfs_distances(k4(), 2) == std::vector<int>{1, 1, 0, 1});
  CHECK_THROWS_AS(bfs_distances(path3(), 3), std::invalid_argument);
}

TEST_CASE("bfs matches the all-pairs oracle on a random graph") {
  Graph g = generate_er({50, 0.1}, 7);
  auto oracle = oracles::floyd_warshall(g);
  for (int s = 0; s < g.num_nodes(); ++s) {
    CHECK(bfs_distances(g, s) == oracle[s]);
  }
}

TEST_CASE("bfs triangle step within components") {
  Graph g = generate_er({80, 0.05}, 11);
  auto d = bfs_distances(g, 0);
  for (auto [u, v] : g.edges()) {
    if (d[u] == kUnreachable || d[v] == kUnreachable) continue;
    CHECK(std::abs(d[u] - d[v]) <= 1);
  }
}

TEST_CASE("connected components") {
  CHECK(connected_components(k4()).size() == 1);
  CHECK(connected_components(k4())[0].size() == 4);

  Graph empty5 = Graph::from_edges(5, {});
  auto comps = connected_components(empty5);
  CHECK(comps.size() == 5);
  for (const auto& c : comps) CHECK(c.size() == 1);

  Graph two_triangles =
      Graph::from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  comps = connected_components(two_triangles);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].size() == 3);
  CHECK(comps[1].size() == 3);
}

TEST_CASE("largest connected subgraph") {
  Graph connected = k4();
  Graph same = largest_connected_subgraph(connected);
  CHECK(same.num_nodes() == 4);
  CHECK(same.edges() == connected.edges());

  Graph mixed = Graph::from_edges(5, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
  Graph tri = largest_connected_subgraph(mixed);
  CHECK(tri.num_nodes() == 3);
  CHECK(tri.num_edges() == 3);

  CHECK_THROWS_AS(largest_connected_subgraph(Graph::from_edges(0, {})),
                  std::invalid_argument);
}

TEST_CASE("largest component size matches the component oracle") {
  Graph g = generate_er({200, 0.004}, 3);
  auto comps = connected_components(g);
  std::size_t biggest = 0;
  for (const auto& c : comps) biggest = std::max(biggest, c.size());
  Graph lcc = largest_connected_subgraph(g);
  CHECK(static_cast<std::size_t>(lcc.num_nodes()) == biggest);
  CHECK(is_connected(lcc));

  // Idempotent.
  Graph again = largest_connected_subgraph(lcc);
  CHECK(again.num_nodes() == lcc.num_nodes());
  CHECK(again.edges() == lcc.edges());
}

TEST_CASE("largest component ties break to the lowest minimum id") {
  Graph tie = Graph::from_edges(6, {{3, 4}, {4, 5}, {0, 1}, {1, 2}});
  Graph picked = largest_connected_subgraph(tie);
  CHECK(picked.num_nodes() == 3);
  // Component {0,1,2} relabels to itself.
  CHECK(picked.edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("degree sequence") {
  CHECK(degree_sequence(k4()) == std::vector<int>{3, 3, 3, 3});
  Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(degree_sequence(star) == std::vector<int>{4, 1, 1, 1, 1});

  Graph g = generate_ba({60, 3}, 5);
  std::int64_t sum = 0;
  for (int d : degree_sequence(g)) sum += d;
  CHECK(sum == 2 * g.num_edges());
}

TEST_CASE("graph file round trip and format") {
  Graph g = generate_ws({12, 4, 0.3}, 9);
  std::stringstream ss;
  write_graph(ss, g, Family::WS, 9);

  std::string header;
  std::getline(ss, header);
  CHECK(header == "12 24 WS 9");
  std::pair<int, int> prev{-1, -1};
  for (int i = 0; i < 24; ++i) {
    int u = 0, v = 0;
    ss >> u >> v;
    CHECK(u < v);
    CHECK(std::make_pair(u, v) > prev);
    prev = {u, v};
  }

  std::stringstream again;
  write_graph(again, g, Family::WS, 9);
  LoadedGraph loaded = read_graph(again);
  CHECK(loaded.family == Family::WS);
  CHECK(loaded.seed == 9);
  CHECK(loaded.graph.edges() == g.edges());
}

TEST_CASE("family names and report order") {
  CHECK(family_from_name("ER") == Family::ER);
  CHECK(family_from_name("SBM") == Family::SBM);
  CHECK(std::string(family_name(Family::HK)) == "HK");
  CHECK(report_index(Family::ER) == 0);
  CHECK(report_index(Family::BA) == 1);
  CHECK(report_index(Family::WS) == 2);
  CHECK(report_index(Family::SBM) == 3);
  CHECK(report_index(Family::HK) == 4);
}
