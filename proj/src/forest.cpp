#include "graphfam/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "graphfam/parallel.hpp"
#include "graphfam/rng.hpp"

namespace graphfam {

namespace {

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double acc = 0.0;
  for (int c : counts) {
    double p = static_cast<double>(c) / total;
    acc += p * p;
  }
  return 1.0 - acc;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = -1.0;
};

struct TreeBuilder {
  const FeatureTable& X;
  const std::vector<int>& y;
  int num_classes;
  const TreeOptions& opts;
  std::mt19937_64 rng;
  DecisionTree tree;
  int total_samples;

  // Scans one feature over the node's samples; returns best decrease or keeps
  // the incumbent. Thresholds are midpoints between consecutive distinct values.
  void scan_feature(int f, std::vector<int>& samples, double node_gini,
                    const std::vector<int>& node_counts, SplitChoice& best) const {
    const int n = static_cast<int>(samples.size());
    std::sort(samples.begin(), samples.end(), [&](int a, int b) {
      double va = X.rows[a][f], vb = X.rows[b][f];
      if (va != vb) return va < vb;
      return a < b;
    });
    std::vector<int> left_counts(num_classes, 0);
    int left_n = 0;
    for (int i = 1; i < n; ++i) {
      int prev = samples[i - 1];
      ++left_counts[y[prev]];
      ++left_n;
      double v_prev = X.rows[prev][f], v_cur = X.rows[samples[i]][f];
      if (v_prev == v_cur) continue;
      std::vector<int> right_counts(num_classes);
      for (int c = 0; c < num_classes; ++c) right_counts[c] = node_counts[c] - left_counts[c];
      int right_n = n - left_n;
      double wl = static_cast<double>(left_n) / n;
      double wr = static_cast<double>(right_n) / n;
      double dec = node_gini - wl * gini(left_counts, left_n) - wr * gini(right_counts, right_n);
      double thr = 0.5 * (v_prev + v_cur);
      if (dec > best.decrease ||
          (dec == best.decrease && (f < best.feature || (f == best.feature && thr < best.threshold)))) {
        best = {f, thr, dec};
      }
    }
  }

  int build(std::vector<int> samples) {
    const int n = static_cast<int>(samples.size());
    std::vector<int> counts(num_classes, 0);
    for (int s : samples) ++counts[y[s]];
    double node_gini = gini(counts, n);
    bool pure = std::count(counts.begin(), counts.end(), 0) >= num_classes - 1;
    if (pure || n < opts.min_samples_split) return make_leaf(counts, n);

    const int num_features = X.cols();
    int mtry = opts.mtry > 0 ? std::min(opts.mtry, num_features)
                             : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_features))));
    std::vector<int> candidates(num_features);
    std::iota(candidates.begin(), candidates.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      int j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(num_features - i)));
      std::swap(candidates[i], candidates[j]);
    }
    std::sort(candidates.begin(), candidates.begin() + mtry);

    SplitChoice best;
    for (int i = 0; i < mtry; ++i) scan_feature(candidates[i], samples, node_gini, counts, best);
    if (best.feature < 0 && mtry < num_features) {
      for (int f = 0; f < num_features; ++f) scan_feature(f, samples, node_gini, counts, best);
    }
    if (best.feature < 0 || best.decrease <= 0.0) return make_leaf(counts, n);

    std::vector<int> left, right;
    for (int s : samples) {
      (X.rows[s][best.feature] <= best.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    tree.impurity_decrease[best.feature] +=
        (static_cast<double>(n) / total_samples) * best.decrease;

    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[idx].feature = best.feature;
    tree.nodes[idx].threshold = best.threshold;
    int l = build(std::move(left));
    int r = build(std::move(right));
    tree.nodes[idx].left = l;
    tree.nodes[idx].right = r;
    return idx;
  }

  int make_leaf(const std::vector<int>& counts, int n) {
    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& leaf = tree.nodes[idx];
    leaf.probs.resize(num_classes);
    for (int c = 0; c < num_classes; ++c)
      leaf.probs[c] = static_cast<double>(counts[c]) / n;
    return idx;
  }
};

}  // namespace

int DecisionTree::predict(const std::vector<double>& x) const {
  int idx = 0;
  while (nodes[idx].feature >= 0) {
    idx = x[nodes[idx].feature] <= nodes[idx].threshold ? nodes[idx].left : nodes[idx].right;
  }
  const auto& p = nodes[idx].probs;
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

DecisionTree fit_tree(const FeatureTable& X, const std::vector<int>& y,
                      const std::vector<int>& bootstrap, int num_classes,
                      const TreeOptions& opts, std::uint64_t seed) {
  if (X.size() == 0 || X.cols() == 0) throw std::invalid_argument("fit_tree: empty input");
  if (bootstrap.empty()) throw std::invalid_argument("fit_tree: empty bootstrap sample");
  for (int s : bootstrap) {
    if (s < 0 || s >= X.size()) throw std::invalid_argument("fit_tree: bootstrap index out of range");
  }
  TreeBuilder builder{X, y, num_classes, opts, std::mt19937_64(seed), {}, 0};
  builder.tree.num_classes = num_classes;
  builder.tree.impurity_decrease.assign(X.cols(), 0.0);
  builder.total_samples = static_cast<int>(bootstrap.size());
  builder.build(bootstrap);
  return std::move(builder.tree);
}

int Forest::predict(const std::vector<double>& x) const {
  std::vector<int> votes(num_classes, 0);
  for (const auto& t : trees) ++votes[t.predict(x)];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Forest fit_forest(const FeatureTable& X, const std::vector<int>& y, int n_trees,
                  const TreeOptions& opts, std::uint64_t seed) {
  if (n_trees < 1) throw std::invalid_argument("fit_forest: n_trees must be >= 1");
  if (X.size() == 0) throw std::invalid_argument("fit_forest: empty input");
  int num_classes = *std::max_element(y.begin(), y.end()) + 1;
  Forest forest;
  forest.num_classes = num_classes;
  forest.trees.resize(n_trees);
  parallel_for(n_trees, 1, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      std::uint64_t tree_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
      std::mt19937_64 boot_rng(tree_seed);
      std::vector<int> bootstrap(X.size());
      for (auto& s : bootstrap)
        s = static_cast<int>(uniform_index(boot_rng, static_cast<std::uint64_t>(X.size())));
      forest.trees[static_cast<std::size_t>(t)] =
          fit_tree(X, y, bootstrap, num_classes, opts, derive_seed(tree_seed, 1));
    }
  });
  forest.importances.assign(X.cols(), 0.0);
  for (const auto& tree : forest.trees) {
    double total = std::accumulate(tree.impurity_decrease.begin(), tree.impurity_decrease.end(), 0.0);
    if (total <= 0.0) continue;
    for (int f = 0; f < X.cols(); ++f)
      forest.importances[f] += tree.impurity_decrease[f] / total / n_trees;
  }
  double total = std::accumulate(forest.importances.begin(), forest.importances.end(), 0.0);
  if (total > 0.0) {
    for (double& v : forest.importances) v /= total;
  }
  return forest;
}

std::vector<double> mean_ensemble_importance(const FeatureTable& X,
                                             const std::vector<int>& y,
                                             int n_forests, int n_trees,
                                             const TreeOptions& opts,
                                             std::uint64_t seed) {
  if (n_forests < 1) throw std::invalid_argument("mean_ensemble_importance: n_forests must be >= 1");
  std::vector<double> mean(X.cols(), 0.0);
  for (int f = 0; f < n_forests; ++f) {
    auto forest = fit_forest(X, y, n_trees, opts, derive_seed(seed, 0x666f7265u, static_cast<std::uint64_t>(f)));
    for (int c = 0; c < X.cols(); ++c) mean[c] += forest.importances[c] / n_forests;
  }
  return mean;
}

std::vector<int> importance_prefix(const std::vector<double>& importances,
                                   double threshold) {
  std::vector<int> order(importances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (importances[a] != importances[b]) return importances[a] > importances[b];
    return a < b;
  });
  double cum = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    cum += importances[order[i]];
    if (cum >= threshold) {
      order.resize(i + 1);
      return order;
    }
  }
  return order;  // no prefix reaches the threshold: keep everything
}

PruneResult prune_recursive(const FeatureTable& X, const std::vector<int>& y,
                            const std::vector<std::string>& feature_names,
                            const PruneOptions& opts, std::uint64_t seed) {
  if (X.cols() == 0) throw std::invalid_argument("prune_recursive: empty feature set");
  if (static_cast<int>(feature_names.size()) != X.cols())
    throw std::invalid_argument("prune_recursive: name/column mismatch");
  if (!(opts.threshold > 0.0 && opts.threshold <= 1.0))
    throw std::invalid_argument("prune_recursive: threshold must be in (0,1]");

  PruneResult result;
  std::vector<int> active(X.cols());
  std::iota(active.begin(), active.end(), 0);
  int pass_idx = 0;
  while (true) {
    FeatureTable sub;
    sub.rows.resize(X.rows.size());
    for (std::size_t r = 0; r < X.rows.size(); ++r) {
      sub.rows[r].reserve(active.size());
      for (int c : active) sub.rows[r].push_back(X.rows[r][c]);
    }
    auto imp = mean_ensemble_importance(sub, y, opts.n_forests, opts.n_trees, opts.tree,
                                        derive_seed(seed, static_cast<std::uint64_t>(pass_idx)));
    auto keep_local = importance_prefix(imp, opts.threshold);
    std::sort(keep_local.begin(), keep_local.end());

    PrunePass pass;
    for (std::size_t i = 0; i < active.size(); ++i) {
      pass.features_in.push_back(feature_names[active[i]]);
      pass.importances.push_back(imp[i]);
    }
    std::vector<int> next;
    std::size_t k = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (k < keep_local.size() && static_cast<int>(i) == keep_local[k]) {
        next.push_back(active[i]);
        pass.retained.push_back(feature_names[active[i]]);
        ++k;
      } else {
        pass.dropped.push_back(feature_names[active[i]]);
      }
    }
    bool done = pass.dropped.empty();
    result.trace.passes.push_back(std::move(pass));
    active = std::move(next);
    ++pass_idx;
    if (done) break;
  }
  result.retained_indices = active;
  for (int c : active) result.retained.push_back(feature_names[c]);
  return result;
}

void write_prune_trace(std::ostream& out, const PruneTrace& trace) {
  for (std::size_t p = 0; p < trace.passes.size(); ++p) {
    const auto& pass = trace.passes[p];
    out << "pass " << p + 1 << "\n";
    for (std::size_t i = 0; i < pass.features_in.size(); ++i) {
      out << "  importance " << pass.features_in[i] << " = " << pass.importances[i] << "\n";
    }
    out << "  retained:";
    for (const auto& f : pass.retained) out << ' ' << f;
    out << "\n  dropped:";
    for (const auto& f : pass.dropped) out << ' ' << f;
    out << "\n";
  }
}

}  // namespace graphfam
