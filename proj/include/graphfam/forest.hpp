#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace graphfam {

/// Row-major numeric table used by tree fitting and the SVM baseline.
struct FeatureTable {
  std::vector<std::vector<double>> rows;
  int cols() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
  int size() const { return static_cast<int>(rows.size()); }
};

/// CART classification tree with Gini splits.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> probs;  // class probabilities at leaves
  };
  std::vector<Node> nodes;
  int num_classes = 0;
  std::vector<double> impurity_decrease;  // per feature, sample-weighted

  int predict(const std::vector<double>& x) const;
};

struct TreeOptions {
  int mtry = 0;           // 0 = ceil(sqrt(F))
  int min_samples_split = 2;
};

/// Fits one tree on the given bootstrap rows. Greedy Gini splits over mtry
/// random candidate features per node (falling back to a full scan when the
/// candidates are constant), grown until pure or below min_samples_split.
DecisionTree fit_tree(const FeatureTable& X, const std::vector<int>& y,
                      const std::vector<int>& bootstrap, int num_classes,
                      const TreeOptions& opts, std::uint64_t seed);

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<double> importances;  // normalized mean decrease in impurity
  int num_classes = 0;

  int predict(const std::vector<double>& x) const;  // majority vote, ties to lower class
};

Forest fit_forest(const FeatureTable& X, const std::vector<int>& y, int n_trees,
                  const TreeOptions& opts, std::uint64_t seed);

/// Mean of the importance vectors of n_forests independently seeded forests.
std::vector<double> mean_ensemble_importance(const FeatureTable& X,
                                             const std::vector<int>& y,
                                             int n_forests, int n_trees,
                                             const TreeOptions& opts,
                                             std::uint64_t seed);

struct PrunePass {
  std::vector<std::string> features_in;
  std::vector<double> importances;  // aligned with features_in
  std::vector<std::string> retained;
  std::vector<std::string> dropped;
};

struct PruneTrace {
  std::vector<PrunePass> passes;
};

struct PruneOptions {
  double threshold = 0.8;
  int n_forests = 5;
  int n_trees = 100;
  TreeOptions tree;
};

struct PruneResult {
  std::vector<std::string> retained;  // original column order
  std::vector<int> retained_indices;  // into the input table
  PruneTrace trace;
};

/// Recursive pruning: per pass, keep the shortest importance-descending prefix
/// reaching the cumulative threshold (all features when no prefix reaches it),
/// recurse on the kept columns, stop when a pass drops nothing.
PruneResult prune_recursive(const FeatureTable& X, const std::vector<int>& y,
                            const std::vector<std::string>& feature_names,
                            const PruneOptions& opts, std::uint64_t seed);

/// Prefix selection rule alone, on a fixed importance vector. Returns indices
/// into the vector, in descending-importance order (ties by ascending index).
std::vector<int> importance_prefix(const std::vector<double>& importances,
                                   double threshold);

void write_prune_trace(std::ostream& out, const PruneTrace& trace);

}  // namespace graphfam
