#include "graphfam/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace graphfam {

const char* architecture_name(Architecture a) {
  switch (a) {
    case Architecture::GCN: return "GCN";
    case Architecture::GIN: return "GIN";
    case Architecture::GAT: return "GAT";
    case Architecture::GATv2: return "GATv2";
    case Architecture::SAGE: return "SAGE";
    case Architecture::GTN: return "GTN";
  }
  throw std::invalid_argument("unknown architecture");
}

Architecture architecture_from_name(const std::string& name) {
  for (Architecture a : all_architectures()) {
    if (name == architecture_name(a)) return a;
  }
  throw std::invalid_argument("unknown architecture: " + name);
}

const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> archs = {
      Architecture::GCN,  Architecture::GIN,  Architecture::GAT,
      Architecture::GATv2, Architecture::SAGE, Architecture::GTN};
  return archs;
}

int GraphClassifier::add_param(const std::string& name, Tensor t) {
  params_.emplace_back(name, std::move(t));
  return static_cast<int>(params_.size()) - 1;
}

int GraphClassifier::find_param(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

GraphClassifier::GraphClassifier(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  const int h = config.hidden;
  if (h < 1) throw std::invalid_argument("model: hidden width must be positive");
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](int r, int c) { return Tensor::glorot(r, c, rng); };

  for (int layer = 0; layer < 2; ++layer) {
    const int in = layer == 0 ? config.node_feature_dim : h;
    const std::string prefix = "conv" + std::to_string(layer + 1) + ".";
    auto& idx = conv_param_idx_[layer];
    switch (config.arch) {
      case Architecture::GCN:
        idx = {add_param(prefix + "theta", glorot(in, h))};
        break;
      case Architecture::SAGE:
        idx = {add_param(prefix + "theta", glorot(2 * in, h))};
        break;
      case Architecture::GIN:
        idx = {add_param(prefix + "w1", glorot(in, h)),
               add_param(prefix + "b1", Tensor(1, h)),
               add_param(prefix + "w2", glorot(h, h)),
               add_param(prefix + "b2", Tensor(1, h)),
               add_param(prefix + "eps", Tensor(1, 1))};
        break;
      case Architecture::GAT:
        idx = {add_param(prefix + "theta", glorot(in, h)),
               add_param(prefix + "attn", glorot(1, 2 * h))};
        break;
      case Architecture::GATv2:
        idx = {add_param(prefix + "wl", glorot(in, h)),
               add_param(prefix + "wr", glorot(in, h)),
               add_param(prefix + "attn", glorot(1, h))};
        break;
      case Architecture::GTN:
        idx = {add_param(prefix + "tq", glorot(in, h)),
               add_param(prefix + "tk", glorot(in, h)),
               add_param(prefix + "tv", glorot(in, h))};
        break;
    }
  }
  for (int b = 0; b < 3; ++b) {
    const std::string prefix = "bn" + std::to_string(b + 1) + ".";
    bn_gamma_[b] = add_param(prefix + "gamma", Tensor::full(1, h, 1.0));
    bn_beta_[b] = add_param(prefix + "beta", Tensor(1, h));
    bn_states_.emplace_back(h);
  }
  fc_w_ = add_param("fc.w", glorot(h + config.graph_feature_dim, h));
  fc_b_ = add_param("fc.b", Tensor(1, h));
  out_w_ = add_param("out.w", glorot(h, config.num_classes));
  out_b_ = add_param("out.b", Tensor(1, config.num_classes));
}

Value GraphClassifier::conv_forward(Tape& tape, Value x,
                                    const BatchedGraphStructure& structure,
                                    int which) {
  const auto& idx = conv_param_idx_[which];
  auto leaf = [&](int i) { return leaves_[i]; };
  switch (config_.arch) {
    case Architecture::GCN:
      return gcn_conv(tape, x, structure, leaf(idx[0]));
    case Architecture::SAGE:
      return sage_conv(tape, x, structure, leaf(idx[0]));
    case Architecture::GIN:
      return gin_conv(tape, x, structure, leaf(idx[0]), leaf(idx[1]), leaf(idx[2]),
                      leaf(idx[3]), leaf(idx[4]));
    case Architecture::GAT:
      return gat_conv(tape, x, structure, leaf(idx[0]), leaf(idx[1]));
    case Architecture::GATv2:
      return gatv2_conv(tape, x, structure, leaf(idx[0]), leaf(idx[1]), leaf(idx[2]));
    case Architecture::GTN:
      return gtn_conv(tape, x, structure, leaf(idx[0]), leaf(idx[1]), leaf(idx[2]));
  }
  throw std::invalid_argument("unknown architecture");
}

GraphClassifier::Output GraphClassifier::forward(Tape& tape, const Tensor& node_feats,
                                                 const Tensor& graph_feats,
                                                 const BatchedGraphStructure& structure,
                                                 Mode mode, std::mt19937_64& dropout_rng) {
  if (node_feats.rows != structure.num_nodes)
    throw std::invalid_argument("forward: node feature rows do not match structure");
  if (graph_feats.rows != structure.num_graphs)
    throw std::invalid_argument("forward: graph feature rows do not match structure");
  if (structure.num_graphs == 0) throw std::invalid_argument("forward: empty batch");

  leaves_.clear();
  leaves_.reserve(params_.size());
  for (const Parameter& p : params_) leaves_.push_back(tape.param(p));

  Value x = tape.input(node_feats);
  Value gf = tape.input(graph_feats);
  const double rate = config_.dropout;

  Value h = conv_forward(tape, x, structure, 0);
  h = tape.relu(h);
  h = tape.batch_norm(h, leaves_[bn_gamma_[0]], leaves_[bn_beta_[0]], bn_states_[0], mode);
  h = tape.dropout(h, rate, mode, dropout_rng);

  h = conv_forward(tape, h, structure, 1);
  h = tape.relu(h);
  h = tape.batch_norm(h, leaves_[bn_gamma_[1]], leaves_[bn_beta_[1]], bn_states_[1], mode);
  h = tape.dropout(h, rate, mode, dropout_rng);

  Value pooled = tape.global_mean_pool(h, structure.graph_of_node, structure.num_graphs);
  Value fused = tape.concat_cols(pooled, gf);
  Value fc = tape.add_row_broadcast(tape.matmul(fused, leaves_[fc_w_]), leaves_[fc_b_]);
  fc = tape.relu(fc);
  fc = tape.batch_norm(fc, leaves_[bn_gamma_[2]], leaves_[bn_beta_[2]], bn_states_[2], mode);
  Value emb = tape.dropout(fc, rate, mode, dropout_rng);
  Value logits = tape.add_row_broadcast(tape.matmul(emb, leaves_[out_w_]), leaves_[out_b_]);
  return {logits, emb};
}

void GraphClassifier::adam_update(Tape& tape, double lr) {
  if (leaves_.size() != params_.size())
    throw std::invalid_argument("adam_update: no forward pass recorded");
  for (std::size_t i = 0; i < params_.size(); ++i)
    adam_step(params_[i], tape.grad(leaves_[i]), lr);
}

std::int64_t GraphClassifier::parameter_count() const {
  std::int64_t total = 0;
  for (const Parameter& p : params_) total += p.value.size();
  return total;
}

GraphClassifier::Snapshot GraphClassifier::snapshot() const {
  Snapshot snap;
  for (const Parameter& p : params_) snap.values.push_back(p.value);
  for (const BatchNormState& s : bn_states_) {
    snap.bn_stats.push_back(s.running_mean);
    snap.bn_stats.push_back(s.running_var);
  }
  return snap;
}

void GraphClassifier::restore(const Snapshot& snap) {
  if (snap.values.size() != params_.size() || snap.bn_stats.size() != 2 * bn_states_.size())
    throw std::invalid_argument("restore: snapshot shape mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = snap.values[i];
  for (std::size_t i = 0; i < bn_states_.size(); ++i) {
    bn_states_[i].running_mean = snap.bn_stats[2 * i];
    bn_states_[i].running_var = snap.bn_stats[2 * i + 1];
  }
}

namespace {

struct NamedTensorRef {
  std::string name;
  const Tensor* tensor;
};

}  // namespace

void GraphClassifier::save(const std::string& path_prefix) const {
  std::vector<NamedTensorRef> entries;
  for (const Parameter& p : params_) entries.push_back({p.name, &p.value});
  for (std::size_t i = 0; i < bn_states_.size(); ++i) {
    const std::string prefix = "bn" + std::to_string(i + 1) + ".";
    entries.push_back({prefix + "running_mean", &bn_states_[i].running_mean});
    entries.push_back({prefix + "running_var", &bn_states_[i].running_var});
  }
  std::ofstream bin(path_prefix + ".bin", std::ios::binary);
  std::ofstream idx(path_prefix + ".idx");
  if (!bin || !idx) throw std::runtime_error("cannot write checkpoint: " + path_prefix);
  std::int64_t offset = 0;
  for (const auto& e : entries) {
    idx << e.name << ' ' << e.tensor->rows << ' ' << e.tensor->cols << ' ' << offset << '\n';
    bin.write(reinterpret_cast<const char*>(e.tensor->data.data()),
              static_cast<std::streamsize>(e.tensor->data.size() * sizeof(double)));
    offset += static_cast<std::int64_t>(e.tensor->data.size() * sizeof(double));
  }
  if (!bin || !idx) throw std::runtime_error("checkpoint write failed: " + path_prefix);
}

void GraphClassifier::load(const std::string& path_prefix) {
  std::ifstream idx(path_prefix + ".idx");
  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!idx || !bin) throw std::runtime_error("cannot open checkpoint: " + path_prefix);
  std::string name;
  int rows = 0, cols = 0;
  std::int64_t offset = 0;
  while (idx >> name >> rows >> cols >> offset) {
    Tensor t(rows, cols);
    bin.seekg(offset);
    bin.read(reinterpret_cast<char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("truncated checkpoint: " + path_prefix);
    bool matched = false;
    int pi = find_param(name);
    if (pi >= 0) {
      if (!params_[pi].value.same_shape(t))
        throw std::runtime_error("checkpoint shape mismatch for " + name);
      params_[pi].value = std::move(t);
      matched = true;
    } else {
      for (std::size_t b = 0; b < bn_states_.size(); ++b) {
        const std::string prefix = "bn" + std::to_string(b + 1) + ".";
        if (name == prefix + "running_mean") {
          bn_states_[b].running_mean = std::move(t);
          matched = true;
        } else if (name == prefix + "running_var") {
          bn_states_[b].running_var = std::move(t);
          matched = true;
        }
      }
    }
    if (!matched) throw std::runtime_error("unknown checkpoint tensor: " + name);
  }
}

}  // namespace graphfam
