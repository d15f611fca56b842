#include "graphfam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "graphfam/parallel.hpp"
#include "graphfam/rng.hpp"

namespace graphfam {

std::vector<int> Dataset::indices_of(int which_split) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (split[i] == which_split) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

std::vector<int> make_split(const std::vector<Family>& labels, double val_fraction,
                            std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("make_split: fraction must be in [0,1)");
  std::vector<int> assignment(labels.size(), kTrainSplit);
  for (int c = 0; c < kNumFamilies; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (static_cast<int>(labels[i]) == c) members.push_back(static_cast<int>(i));
    }
    if (members.empty()) continue;
    if (val_fraction == 0.0) continue;
    if (members.size() < 2)
      throw std::invalid_argument("make_split: class too small to split");
    auto n_val = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(members.size())));
    n_val = std::max<std::size_t>(1, std::min(n_val, members.size() - 1));
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::size_t j = uniform_index(rng, i + 1);
      std::swap(members[i], members[j]);
    }
    for (std::size_t i = 0; i < n_val; ++i) assignment[members[i]] = kValSplit;
  }
  return assignment;
}

void compute_features(Dataset& dataset) {
  parallel_for(static_cast<std::int64_t>(dataset.records.size()), 1,
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   GraphRecord& rec = dataset.records[static_cast<std::size_t>(i)];
                   rec.node_feats = node_features(rec.graph);
                   rec.graph_feats = graph_features(rec.graph);
                 }
               });
}

FeatureStats compute_feature_stats(const Dataset& dataset) {
  if (dataset.split.size() != dataset.records.size())
    throw std::invalid_argument("feature stats: split not assigned");
  FeatureStats stats;
  std::array<double, kNodeFeatureCount> nsum{}, nsq{};
  std::array<double, kGraphFeatureCount> gsum{}, gsq{};
  std::int64_t node_count = 0, graph_count = 0;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    if (dataset.split[i] != kTrainSplit) continue;
    const GraphRecord& rec = dataset.records[i];
    if (rec.node_feats.empty() && rec.graph.num_nodes() > 0)
      throw std::invalid_argument("feature stats: features not computed");
    for (const auto& row : rec.node_feats) {
      for (int c = 0; c < kNodeFeatureCount; ++c) {
        nsum[c] += row[c];
        nsq[c] += row[c] * row[c];
      }
      ++node_count;
    }
    auto gv = rec.graph_feats.values();
    for (int c = 0; c < kGraphFeatureCount; ++c) {
      gsum[c] += gv[c];
      gsq[c] += gv[c] * gv[c];
    }
    ++graph_count;
  }
  if (node_count == 0 || graph_count == 0)
    throw std::invalid_argument("feature stats: empty training split");
  for (int c = 0; c < kNodeFeatureCount; ++c) {
    stats.node_mean[c] = nsum[c] / node_count;
    double var = nsq[c] / node_count - stats.node_mean[c] * stats.node_mean[c];
    stats.node_std[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  for (int c = 0; c < kGraphFeatureCount; ++c) {
    stats.graph_mean[c] = gsum[c] / graph_count;
    double var = gsq[c] / graph_count - stats.graph_mean[c] * stats.graph_mean[c];
    stats.graph_std[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return stats;
}

Batch assemble_batch(const Dataset& dataset, const std::vector<int>& record_indices) {
  if (record_indices.empty()) throw std::invalid_argument("assemble_batch: empty batch");
  Batch batch;
  batch.record_indices = record_indices;
  std::vector<const Graph*> graphs;
  graphs.reserve(record_indices.size());
  int total_nodes = 0;
  for (int idx : record_indices) {
    const GraphRecord& rec = dataset.records[idx];
    graphs.push_back(&rec.graph);
    total_nodes += rec.graph.num_nodes();
    batch.labels.push_back(static_cast<int>(rec.label));
  }
  batch.structure = BatchedGraphStructure::build(graphs);
  batch.node_feats = Tensor(total_nodes, kNodeFeatureCount);
  batch.graph_feats = Tensor(static_cast<int>(record_indices.size()), kGraphFeatureCount);
  const FeatureStats& st = dataset.stats;
  int row = 0;
  for (std::size_t b = 0; b < record_indices.size(); ++b) {
    const GraphRecord& rec = dataset.records[record_indices[b]];
    for (const auto& nf : rec.node_feats) {
      for (int c = 0; c < kNodeFeatureCount; ++c)
        batch.node_feats.at(row, c) = (nf[c] - st.node_mean[c]) / st.node_std[c];
      ++row;
    }
    auto gv = rec.graph_feats.values();
    for (int c = 0; c < kGraphFeatureCount; ++c)
      batch.graph_feats.at(static_cast<int>(b), c) =
          (gv[c] - st.graph_mean[c]) / st.graph_std[c];
  }
  return batch;
}

}  // namespace graphfam
