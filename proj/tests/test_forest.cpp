#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>
#include <random>

#include "graphfam/forest.hpp"
#include "graphfam/rng.hpp"

using namespace graphfam;

namespace {

std::vector<int> identity_bootstrap(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// Feature 0 separates the two classes; feature 1 is uniform noise.
FeatureTable noisy_dataset(std::vector<int>& labels, std::uint64_t seed, int per_class = 60) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.25);
  FeatureTable table;
  labels.clear();
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < per_class; ++i) {
      table.rows.push_back({c + jitter(rng), noise(rng)});
      labels.push_back(c);
    }
  }
  return table;
}

}  // namespace

TEST_CASE("single-class input gives a single leaf with zero importances") {
  FeatureTable table;
  table.rows = {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}};
  std::vector<int> y = {2, 2, 2};
  DecisionTree tree = fit_tree(table, y, identity_bootstrap(3), 3, {}, 1);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].feature == -1);
  for (double imp : tree.impurity_decrease) CHECK(imp == 0.0);
  CHECK(tree.predict({0.0, 0.0}) == 2);
}

TEST_CASE("separable one-dimensional data splits once") {
  FeatureTable table;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    table.rows.push_back({0.0});
    y.push_back(0);
    table.rows.push_back({1.0});
    y.push_back(1);
  }
  DecisionTree tree = fit_tree(table, y, identity_bootstrap(100), 2, {}, 7);
  CHECK(tree.nodes.size() == 3);  // one split, two leaves
  int correct = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (tree.predict(table.rows[i]) == y[i]) ++correct;
  }
  CHECK(correct == 100);
  CHECK_THROWS_AS(fit_tree(FeatureTable{}, {}, {}, 2, {}, 1), std::invalid_argument);
}

TEST_CASE("informative feature dominates importance") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<int> y;
    FeatureTable table = noisy_dataset(y, 100 + seed);
    Forest forest = fit_forest(table, y, 50, {}, seed);
    CHECK(forest.importances[0] > 0.9);
  }
}

TEST_CASE("forest importances are normalized and deterministic") {
  std::vector<int> y;
  FeatureTable table = noisy_dataset(y, 3);
  Forest a = fit_forest(table, y, 30, {}, 11);
  Forest b = fit_forest(table, y, 30, {}, 11);
  double sum = std::accumulate(a.importances.begin(), a.importances.end(), 0.0);
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(a.importances == b.importances);
  for (const auto& row : table.rows) CHECK(a.predict(row) == b.predict(row));
}

TEST_CASE("majority vote is at least as accurate as a single tree") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<int> y;
    FeatureTable table = noisy_dataset(y, 40 + seed, 40);
    Forest forest = fit_forest(table, y, 25, {}, seed);
    auto accuracy_of = [&](auto&& predict) {
      int correct = 0;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (predict(table.rows[i]) == y[i]) ++correct;
      }
      return static_cast<double>(correct) / table.rows.size();
    };
    double forest_acc = accuracy_of([&](const auto& row) { return forest.predict(row); });
    double tree_acc =
        accuracy_of([&](const auto& row) { return forest.trees[0].predict(row); });
    CHECK(forest_acc >= tree_acc);
  }
}

TEST_CASE("ensemble importance equals the mean of its forests") {
  std::vector<int> y;
  FeatureTable table = noisy_dataset(y, 5);
  auto mean = mean_ensemble_importance(table, y, 1, 20, {}, 21);
  auto forest = fit_forest(table, y, 20, {}, derive_seed(21, 0x666f7265u, 0));
  CHECK(mean == forest.importances);

  auto five = mean_ensemble_importance(table, y, 5, 20, {}, 21);
  CHECK(std::abs(std::accumulate(five.begin(), five.end(), 0.0) - 1.0) < 1e-12);
}

TEST_CASE("ensemble averaging reduces importance variance") {
  std::vector<int> y;
  FeatureTable table = noisy_dataset(y, 9);
  std::vector<double> single, ensemble;
  for (std::uint64_t s = 0; s < 10; ++s) {
    single.push_back(fit_forest(table, y, 5, {}, 1000 + s).importances[1]);
    ensemble.push_back(mean_ensemble_importance(table, y, 5, 5, {}, 2000 + s)[1]);
  }
  auto variance = [](const std::vector<double>& xs) {
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / xs.size();
  };
  CHECK(variance(ensemble) < variance(single));
}

TEST_CASE("importance prefix rule") {
  CHECK(importance_prefix({0.5, 0.3, 0.15, 0.05}, 0.8) == std::vector<int>{0, 1});
  CHECK(importance_prefix({1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.8) == std::vector<int>{0, 1, 2});
  CHECK(importance_prefix({1.0}, 0.8) == std::vector<int>{0});
  CHECK(importance_prefix({0.05, 0.5, 0.3, 0.15}, 0.8) == std::vector<int>{1, 2});
  // Ties break toward the lower column index.
  CHECK(importance_prefix({0.4, 0.4, 0.2}, 0.8) == std::vector<int>{0, 1});
  // No prefix reaches the threshold: keep everything.
  CHECK(importance_prefix({0.0, 0.0}, 0.8) == std::vector<int>{0, 1});
}

TEST_CASE("recursive pruning terminates and keeps a non-empty set") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  FeatureTable table;
  std::vector<int> y;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 50; ++i) {
      // Two informative columns and four noise columns.
      table.rows.push_back({c * 1.0 + noise(rng) * 0.3, (c == 1 ? 1.0 : 0.0) + noise(rng) * 0.3,
                            noise(rng), noise(rng), noise(rng), noise(rng)});
      y.push_back(c);
    }
  }
  std::vector<std::string> names = {"a", "b", "n1", "n2", "n3", "n4"};
  PruneOptions opts;
  opts.n_trees = 30;
  PruneResult result = prune_recursive(table, y, names, opts, 77);
  CHECK_FALSE(result.retained.empty());
  CHECK(result.trace.passes.size() <= names.size());
  CHECK(result.trace.passes.back().dropped.empty());
  // Pass sizes are non-increasing.
  for (std::size_t p = 1; p < result.trace.passes.size(); ++p) {
    CHECK(result.trace.passes[p].features_in.size() <=
          result.trace.passes[p - 1].features_in.size());
  }
  // The informative column survives.
  CHECK(std::find(result.retained.begin(), result.retained.end(), "a") !=
        result.retained.end());

  CHECK_THROWS_AS(prune_recursive(FeatureTable{}, {}, {}, opts, 1), std::invalid_argument);
}

TEST_CASE("single feature is retained immediately") {
  FeatureTable table;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    table.rows.push_back({i < 20 ? 0.0 : 1.0});
    y.push_back(i < 20 ? 0 : 1);
  }
  PruneOptions opts;
  opts.n_trees = 10;
  PruneResult result = prune_recursive(table, y, {"only"}, opts, 3);
  CHECK(result.retained == std::vector<std::string>{"only"});
  CHECK(result.trace.passes.size() == 1);
}
