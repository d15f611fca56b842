#include "graphfam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "graphfam/metrics.hpp"
#include "graphfam/parallel.hpp"
#include "graphfam/rng.hpp"
#include "graphfam/svm.hpp"
#include "graphfam/training.hpp"

namespace graphfam {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string out_path(const PipelineConfig& config, const std::string& rel) {
  return (fs::path(config.out_dir) / rel).string();
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  return out;
}

std::ifstream open_in(const std::string& path, const std::string& stage_hint) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path + " (run `graphfam " + stage_hint +
                             "` first)");
  return in;
}

std::string graph_file_name(int index) {
  std::ostringstream os;
  os << "g_" << std::setw(5) << std::setfill('0') << index << ".txt";
  return os.str();
}

double sample_uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + uniform01(rng) * (hi - lo);
}

int sample_choice(std::mt19937_64& rng, const std::vector<int>& choices) {
  if (choices.empty()) throw std::invalid_argument("empty choice list in config");
  return choices[uniform_index(rng, choices.size())];
}

}  // namespace

void apply_scale(PipelineConfig& config, const std::string& scale) {
  if (scale == "desk") {
    config.graphs_per_family = 40;
    config.node_min = 200;
    config.node_max = 400;
    config.hpo_trials = 10;
    config.hpo_epochs = 5;
  } else if (scale == "paper") {
    config.graphs_per_family = 400;
    config.node_min = 5000;
    config.node_max = 10000;
    config.hpo_trials = 50;
    config.hpo_epochs = 10;
  } else {
    throw std::invalid_argument("unknown scale: " + scale + " (expected desk or paper)");
  }
  config.scale = scale;
}

PipelineConfig pipeline_config_from(const Config& file) {
  PipelineConfig c;
  std::string scale = file.get_or("pipeline", "scale", "desk");
  apply_scale(c, scale);
  c.out_dir = file.get_or("pipeline", "out", c.out_dir);
  c.seed = file.get_uint("pipeline", "seed", c.seed);
  c.workers = static_cast<int>(file.get_int("pipeline", "workers", c.workers));
  c.graphs_per_family =
      static_cast<int>(file.get_int("pipeline", "graphs_per_family", c.graphs_per_family));
  c.node_min = static_cast<int>(file.get_int("pipeline", "node_min", c.node_min));
  c.node_max = static_cast<int>(file.get_int("pipeline", "node_max", c.node_max));
  c.val_fraction = file.get_double("pipeline", "val_fraction", c.val_fraction);
  if (file.has("pipeline", "architectures")) {
    c.architectures.clear();
    std::stringstream ss(file.get("pipeline", "architectures"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      if (!item.empty()) c.architectures.push_back(item);
    }
  }
  c.hpo_trials = static_cast<int>(file.get_int("hpo", "trials", c.hpo_trials));
  c.hpo_epochs = static_cast<int>(file.get_int("hpo", "trial_epochs", c.hpo_epochs));
  c.max_epochs = static_cast<int>(file.get_int("train", "max_epochs", c.max_epochs));
  c.early_stop_patience =
      static_cast<int>(file.get_int("train", "early_stop_patience", c.early_stop_patience));
  c.batch_size = static_cast<int>(file.get_int("train", "batch_size", c.batch_size));
  c.prune_threshold = file.get_double("selection", "threshold", c.prune_threshold);
  c.selection_forests = static_cast<int>(file.get_int("selection", "forests", c.selection_forests));
  c.selection_trees = static_cast<int>(file.get_int("selection", "trees", c.selection_trees));
  c.svm_c = file.get_double("svm", "c", c.svm_c);
  c.svm_gamma = file.get_double("svm", "gamma", c.svm_gamma);

  FamilyDistributions& d = c.dist;
  d.er_degree_min = file.get_double("er", "mean_degree_min", d.er_degree_min);
  d.er_degree_max = file.get_double("er", "mean_degree_max", d.er_degree_max);
  if (file.has("ws", "k_choices")) d.ws_k_choices = parse_int_list(file.get("ws", "k_choices"));
  d.ws_p_min = file.get_double("ws", "p_min", d.ws_p_min);
  d.ws_p_max = file.get_double("ws", "p_max", d.ws_p_max);
  if (file.has("ba", "m_choices")) d.ba_m_choices = parse_int_list(file.get("ba", "m_choices"));
  if (file.has("hk", "m_choices")) d.hk_m_choices = parse_int_list(file.get("hk", "m_choices"));
  d.hk_p_min = file.get_double("hk", "p_triad_min", d.hk_p_min);
  d.hk_p_max = file.get_double("hk", "p_triad_max", d.hk_p_max);
  if (file.has("sbm", "block_choices"))
    d.sbm_block_choices = parse_int_list(file.get("sbm", "block_choices"));
  d.sbm_degree_min = file.get_double("sbm", "mean_degree_min", d.sbm_degree_min);
  d.sbm_degree_max = file.get_double("sbm", "mean_degree_max", d.sbm_degree_max);
  d.sbm_ratio_min = file.get_double("sbm", "ratio_min", d.sbm_ratio_min);
  d.sbm_ratio_max = file.get_double("sbm", "ratio_max", d.sbm_ratio_max);
  return c;
}

Config pipeline_config_to(const PipelineConfig& c) {
  Config f;
  f.set("pipeline", "scale", c.scale);
  f.set("pipeline", "out", c.out_dir);
  f.set_uint("pipeline", "seed", c.seed);
  f.set_int("pipeline", "workers", c.workers);
  f.set_int("pipeline", "graphs_per_family", c.graphs_per_family);
  f.set_int("pipeline", "node_min", c.node_min);
  f.set_int("pipeline", "node_max", c.node_max);
  f.set_double("pipeline", "val_fraction", c.val_fraction);
  std::string archs;
  for (std::size_t i = 0; i < c.architectures.size(); ++i) {
    if (i) archs += ",";
    archs += c.architectures[i];
  }
  f.set("pipeline", "architectures", archs);
  f.set_int("hpo", "trials", c.hpo_trials);
  f.set_int("hpo", "trial_epochs", c.hpo_epochs);
  f.set_int("train", "max_epochs", c.max_epochs);
  f.set_int("train", "early_stop_patience", c.early_stop_patience);
  f.set_int("train", "batch_size", c.batch_size);
  f.set_double("selection", "threshold", c.prune_threshold);
  f.set_int("selection", "forests", c.selection_forests);
  f.set_int("selection", "trees", c.selection_trees);
  f.set_double("svm", "c", c.svm_c);
  f.set_double("svm", "gamma", c.svm_gamma);
  const FamilyDistributions& d = c.dist;
  f.set_double("er", "mean_degree_min", d.er_degree_min);
  f.set_double("er", "mean_degree_max", d.er_degree_max);
  f.set("ws", "k_choices", format_int_list(d.ws_k_choices));
  f.set_double("ws", "p_min", d.ws_p_min);
  f.set_double("ws", "p_max", d.ws_p_max);
  f.set("ba", "m_choices", format_int_list(d.ba_m_choices));
  f.set("hk", "m_choices", format_int_list(d.hk_m_choices));
  f.set_double("hk", "p_triad_min", d.hk_p_min);
  f.set_double("hk", "p_triad_max", d.hk_p_max);
  f.set("sbm", "block_choices", format_int_list(d.sbm_block_choices));
  f.set_double("sbm", "mean_degree_min", d.sbm_degree_min);
  f.set_double("sbm", "mean_degree_max", d.sbm_degree_max);
  f.set_double("sbm", "ratio_min", d.sbm_ratio_min);
  f.set_double("sbm", "ratio_max", d.sbm_ratio_max);
  return f;
}

ModelConfig default_model_config(Architecture arch) {
  ModelConfig c;
  c.arch = arch;
  c.hidden = 64;
  c.learning_rate = 1.5e-3;
  c.dropout = 0.3;
  return c;
}

GeneratedGraph generate_record(const PipelineConfig& config, Family family, int index) {
  const std::uint64_t record_seed = derive_seed(
      config.seed, static_cast<std::uint64_t>(family), static_cast<std::uint64_t>(index));
  std::mt19937_64 param_rng(derive_seed(record_seed, 100));
  const std::uint64_t gen_seed = derive_seed(record_seed, 200);
  const int n = config.node_min +
                static_cast<int>(uniform_index(
                    param_rng, static_cast<std::uint64_t>(config.node_max - config.node_min + 1)));
  const FamilyDistributions& d = config.dist;

  GeneratedGraph out;
  out.prov.family = family;
  out.prov.seed = gen_seed;
  out.prov.initial_n = n;
  std::ostringstream params;
  params.precision(17);
  switch (family) {
    case Family::ER: {
      double degree = sample_uniform(param_rng, d.er_degree_min, d.er_degree_max);
      double p = std::clamp(degree / (n - 1), 0.0, 1.0);
      params << "n=" << n << ";p=" << p;
      out.graph = generate_er({n, p}, gen_seed);
      break;
    }
    case Family::WS: {
      int k = sample_choice(param_rng, d.ws_k_choices);
      double p = sample_uniform(param_rng, d.ws_p_min, d.ws_p_max);
      params << "n=" << n << ";k=" << k << ";p=" << p;
      out.graph = generate_ws({n, k, p}, gen_seed);
      break;
    }
    case Family::BA: {
      int m = sample_choice(param_rng, d.ba_m_choices);
      params << "n=" << n << ";m=" << m;
      out.graph = generate_ba({n, m}, gen_seed);
      break;
    }
    case Family::HK: {
      int m = sample_choice(param_rng, d.hk_m_choices);
      double pt = sample_uniform(param_rng, d.hk_p_min, d.hk_p_max);
      params << "n=" << n << ";m=" << m << ";p_triad=" << pt;
      out.graph = generate_hk({n, m, pt}, gen_seed);
      break;
    }
    case Family::SBM: {
      int blocks = sample_choice(param_rng, d.sbm_block_choices);
      double degree = sample_uniform(param_rng, d.sbm_degree_min, d.sbm_degree_max);
      double ratio = sample_uniform(param_rng, d.sbm_ratio_min, d.sbm_ratio_max);
      std::vector<int> sizes(blocks, n / blocks);
      for (int b = 0; b < n % blocks; ++b) ++sizes[b];
      double s = static_cast<double>(n) / blocks;
      double p_in = std::clamp(degree / ((s - 1.0) + (n - s) / ratio), 0.0, 1.0);
      double p_out = std::clamp(p_in / ratio, 0.0, 1.0);
      std::vector<std::vector<double>> probs(blocks, std::vector<double>(blocks, p_out));
      for (int b = 0; b < blocks; ++b) probs[b][b] = p_in;
      params << "n=" << n << ";blocks=" << blocks << ";p_in=" << p_in << ";p_out=" << p_out;
      out.graph = generate_sbm({sizes, probs}, gen_seed);
      break;
    }
  }
  out.prov.params = params.str();
  if (!is_connected(out.graph)) out.graph = largest_connected_subgraph(out.graph);
  return out;
}

Dataset build_dataset(const PipelineConfig& config) {
  if (config.graphs_per_family < 1)
    throw std::invalid_argument("build_dataset: graphs_per_family must be >= 1");
  if (config.node_min < 1 || config.node_max < config.node_min)
    throw std::invalid_argument("build_dataset: bad node bounds");
  Dataset dataset;
  const int per = config.graphs_per_family;
  dataset.records.resize(static_cast<std::size_t>(per) * kNumFamilies);
  parallel_for(static_cast<std::int64_t>(dataset.records.size()), 1,
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   Family family = static_cast<Family>(i / per);
                   int index = static_cast<int>(i % per);
                   try {
                     GeneratedGraph g = generate_record(config, family, index);
                     GraphRecord& rec = dataset.records[static_cast<std::size_t>(i)];
                     rec.graph = std::move(g.graph);
                     rec.label = family;
                     rec.prov = std::move(g.prov);
                   } catch (const std::exception& e) {
                     throw std::runtime_error("generator failure at " +
                                              std::string(family_name(family)) + " index " +
                                              std::to_string(index) + ": " + e.what());
                   }
                 }
               });
  std::vector<Family> labels;
  labels.reserve(dataset.records.size());
  for (const auto& rec : dataset.records) labels.push_back(rec.label);
  dataset.split = make_split(labels, config.val_fraction, derive_seed(config.seed, 777));
  return dataset;
}

namespace {

void write_provenance(const PipelineConfig& config, const Dataset& dataset) {
  auto out = open_out(out_path(config, "provenance.tsv"));
  out << "id\tfamily\tseed\tn\tm\tinitial_n\tparams\n";
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const GraphRecord& rec = dataset.records[i];
    out << i << '\t' << family_name(rec.label) << '\t' << rec.prov.seed << '\t'
        << rec.graph.num_nodes() << '\t' << rec.graph.num_edges() << '\t'
        << rec.prov.initial_n << '\t' << rec.prov.params << '\n';
  }
}

void write_split(const PipelineConfig& config, const Dataset& dataset) {
  auto out = open_out(out_path(config, "split.tsv"));
  out << "id\tsplit\n";
  for (std::size_t i = 0; i < dataset.split.size(); ++i)
    out << i << '\t' << (dataset.split[i] == kTrainSplit ? "train" : "val") << '\n';
}

void write_feature_stats(const PipelineConfig& config, const FeatureStats& stats) {
  auto out = open_out(out_path(config, "features/feature_stats.txt"));
  for (int c = 0; c < kNodeFeatureCount; ++c) {
    out << "node_mean." << node_feature_names()[c] << " = " << stats.node_mean[c] << '\n';
    out << "node_std." << node_feature_names()[c] << " = " << stats.node_std[c] << '\n';
  }
  for (int c = 0; c < kGraphFeatureCount; ++c) {
    out << "graph_mean." << graph_feature_names()[c] << " = " << stats.graph_mean[c] << '\n';
    out << "graph_std." << graph_feature_names()[c] << " = " << stats.graph_std[c] << '\n';
  }
}

FeatureStats read_feature_stats(const PipelineConfig& config) {
  auto in = open_in(out_path(config, "features/feature_stats.txt"), "features");
  FeatureStats stats;
  std::string key, eq;
  double value = 0.0;
  while (in >> key >> eq >> value) {
    for (int c = 0; c < kNodeFeatureCount; ++c) {
      if (key == "node_mean." + node_feature_names()[c]) stats.node_mean[c] = value;
      if (key == "node_std." + node_feature_names()[c]) stats.node_std[c] = value;
    }
    for (int c = 0; c < kGraphFeatureCount; ++c) {
      if (key == "graph_mean." + graph_feature_names()[c]) stats.graph_mean[c] = value;
      if (key == "graph_std." + graph_feature_names()[c]) stats.graph_std[c] = value;
    }
  }
  return stats;
}

int dataset_size_on_disk(const PipelineConfig& config) {
  auto in = open_in(out_path(config, "provenance.tsv"), "generate");
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.find("id\t") != 0) ++count;
  }
  return count;
}

std::vector<std::string> read_retained(const PipelineConfig& config) {
  auto in = open_in(out_path(config, "selection/retained_features.txt"), "select");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

FeatureTable read_candidate_table(const PipelineConfig& config, std::vector<int>* labels_out) {
  auto in = open_in(out_path(config, "features/candidate_table.tsv"), "features");
  std::string header;
  std::getline(in, header);
  FeatureTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int id = 0;
    std::string family;
    ls >> id >> family;
    std::vector<double> row(kCandidateFeatureCount);
    for (int c = 0; c < kCandidateFeatureCount; ++c) ls >> row[c];
    if (!ls) throw std::runtime_error("malformed candidate table row: " + line);
    table.rows.push_back(std::move(row));
    if (labels_out) labels_out->push_back(static_cast<int>(family_from_name(family)));
  }
  return table;
}

std::vector<int> read_split_file(const PipelineConfig& config) {
  auto in = open_in(out_path(config, "split.tsv"), "generate");
  std::string header;
  std::getline(in, header);
  std::vector<int> split;
  int id = 0;
  std::string tag;
  while (in >> id >> tag) split.push_back(tag == "val" ? kValSplit : kTrainSplit);
  return split;
}

ModelConfig read_best_config(const PipelineConfig& config, Architecture arch) {
  const std::string path = out_path(config, "hpo/best_configs.txt");
  if (!fs::exists(path)) return default_model_config(arch);
  Config file = Config::load(path);
  const std::string section = std::string("best.") + architecture_name(arch);
  ModelConfig mc = default_model_config(arch);
  mc.hidden = static_cast<int>(file.get_int(section, "hidden_channels", mc.hidden));
  mc.learning_rate = file.get_double(section, "learning_rate", mc.learning_rate);
  mc.dropout = file.get_double(section, "dropout_rate", mc.dropout);
  return mc;
}

void save_best_config(const PipelineConfig& config, const ModelConfig& mc) {
  const std::string path = out_path(config, "hpo/best_configs.txt");
  Config file = fs::exists(path) ? Config::load(path) : Config();
  const std::string section = std::string("best.") + architecture_name(mc.arch);
  file.set_int(section, "hidden_channels", mc.hidden);
  file.set_double(section, "learning_rate", mc.learning_rate);
  file.set_double(section, "dropout_rate", mc.dropout);
  file.save(path);
}

std::vector<Architecture> architectures_of(const PipelineConfig& config) {
  std::vector<Architecture> archs;
  for (const std::string& name : config.architectures)
    archs.push_back(architecture_from_name(name));
  return archs;
}

void train_one_gnn(const PipelineConfig& config, const Dataset& dataset, Architecture arch) {
  ModelConfig mc = read_best_config(config, arch);
  GraphClassifier model(mc, derive_seed(config.seed, 9000, static_cast<std::uint64_t>(arch)));
  TrainOptions topts;
  topts.max_epochs = config.max_epochs;
  topts.early_stop_patience = config.early_stop_patience;
  topts.batch_size = config.batch_size;
  topts.seed = derive_seed(config.seed, 9100, static_cast<std::uint64_t>(arch));
  TrainReport report = train(model, dataset, topts);

  const std::string name = architecture_name(arch);
  ensure_dir(out_path(config, "models"));
  ensure_dir(out_path(config, "reports"));
  ensure_dir(out_path(config, "metrics"));
  ensure_dir(out_path(config, "embeddings"));
  model.save(out_path(config, "models/" + name));
  {
    auto out = open_out(out_path(config, "reports/train_" + name + ".txt"));
    out << "architecture = " << name << '\n';
    out << "hidden_channels = " << mc.hidden << '\n';
    out << "learning_rate = " << mc.learning_rate << '\n';
    out << "dropout_rate = " << mc.dropout << '\n';
    out << "parameters = " << model.parameter_count() << '\n';
    write_train_report(out, report, /*include_timing=*/true);
  }
  {
    auto out = open_out(out_path(config, "metrics/metrics_" + name + ".txt"));
    MetricsReport metrics = metrics_from_confusion(report.confusion);
    out << "architecture = " << name << '\n';
    out << "epochs_run = " << report.epochs.size() << '\n';
    out << "best_val_loss = " << report.best_val_loss << '\n';
    write_metrics(out, metrics);
  }
  {
    auto out = open_out(out_path(config, "metrics/confusion_" + name + ".tsv"));
    write_confusion(out, report.confusion);
  }
  {
    EvalResult all = evaluate(model, dataset, [&] {
      std::vector<int> idx(dataset.records.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      return idx;
    }(), config.batch_size);
    auto out = open_out(out_path(config, "embeddings/" + name + ".tsv"));
    out << "graph_id\tfamily";
    for (int c = 0; c < mc.hidden; ++c) out << "\te" << c;
    out << '\n';
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
      out << i << '\t' << family_name(dataset.records[i].label);
      for (int c = 0; c < mc.hidden; ++c) out << '\t' << all.embeddings.at(static_cast<int>(i), c);
      out << '\n';
    }
  }
}

FeatureTable retained_rows(const FeatureTable& candidates,
                           const std::vector<std::string>& retained) {
  std::vector<int> cols;
  const auto& names = candidate_feature_names();
  for (const std::string& name : retained) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::runtime_error("unknown retained feature: " + name);
    cols.push_back(static_cast<int>(it - names.begin()));
  }
  FeatureTable out;
  out.rows.reserve(candidates.rows.size());
  for (const auto& row : candidates.rows) {
    std::vector<double> r;
    r.reserve(cols.size());
    for (int c : cols) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

void train_svm_baseline(const PipelineConfig& config) {
  std::vector<int> labels;
  FeatureTable candidates = read_candidate_table(config, &labels);
  std::vector<std::string> retained = read_retained(config);
  std::vector<int> split = read_split_file(config);
  if (split.size() != candidates.rows.size())
    throw std::runtime_error("split/candidate-table size mismatch");
  FeatureTable rows = retained_rows(candidates, retained);

  // Standardize on training rows.
  const int dim = rows.cols();
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  int train_count = 0;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    if (split[i] != kTrainSplit) continue;
    for (int c = 0; c < dim; ++c) mean[c] += rows.rows[i][c];
    ++train_count;
  }
  if (train_count == 0) throw std::runtime_error("svm: empty training split");
  for (int c = 0; c < dim; ++c) mean[c] /= train_count;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    if (split[i] != kTrainSplit) continue;
    for (int c = 0; c < dim; ++c) {
      double d = rows.rows[i][c] - mean[c];
      sd[c] += d * d;
    }
  }
  for (int c = 0; c < dim; ++c) {
    sd[c] = std::sqrt(sd[c] / train_count);
    if (sd[c] < 1e-12) sd[c] = 1.0;
  }
  for (auto& row : rows.rows) {
    for (int c = 0; c < dim; ++c) row[c] = (row[c] - mean[c]) / sd[c];
  }

  FeatureTable train_rows;
  std::vector<int> train_labels, val_labels, val_pred;
  std::vector<std::vector<double>> val_rows;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    if (split[i] == kTrainSplit) {
      train_rows.rows.push_back(rows.rows[i]);
      train_labels.push_back(labels[i]);
    } else {
      val_rows.push_back(rows.rows[i]);
      val_labels.push_back(labels[i]);
    }
  }
  SvmOptions opts;
  opts.C = config.svm_c;
  opts.gamma = config.svm_gamma;
  opts.seed = derive_seed(config.seed, 9500);
  SvmModel model = fit_svm(train_rows, train_labels, opts);
  for (const auto& row : val_rows) val_pred.push_back(model.predict(row));

  ensure_dir(out_path(config, "models"));
  ensure_dir(out_path(config, "metrics"));
  {
    auto out = open_out(out_path(config, "models/svm.txt"));
    write_svm(out, model);
  }
  ConfusionMatrix cm = confusion(val_labels, val_pred);
  {
    auto out = open_out(out_path(config, "metrics/metrics_SVM.txt"));
    out << "architecture = SVM\n";
    write_metrics(out, metrics_from_confusion(cm));
  }
  {
    auto out = open_out(out_path(config, "metrics/confusion_SVM.tsv"));
    write_confusion(out, cm);
  }
}

}  // namespace

void stage_generate(const PipelineConfig& config) {
  Dataset dataset = build_dataset(config);
  ensure_dir(out_path(config, "graphs"));
  parallel_for(static_cast<std::int64_t>(dataset.records.size()), 1,
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   const GraphRecord& rec = dataset.records[static_cast<std::size_t>(i)];
                   write_graph_file(
                       out_path(config, "graphs/" + graph_file_name(static_cast<int>(i))),
                       rec.graph, rec.label, rec.prov.seed);
                 }
               });
  write_provenance(config, dataset);
  write_split(config, dataset);
  pipeline_config_to(config).save(out_path(config, "config.txt"));
}

Dataset load_dataset(const PipelineConfig& config, bool require_features) {
  Dataset dataset;
  const int total = dataset_size_on_disk(config);
  dataset.records.resize(total);
  // Re-read provenance for params/seeds.
  {
    auto in = open_in(out_path(config, "provenance.tsv"), "generate");
    std::string header;
    std::getline(in, header);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      int id = 0;
      std::string family;
      std::uint64_t seed = 0;
      int n = 0;
      std::int64_t m = 0;
      int initial_n = 0;
      std::string params;
      ls >> id >> family >> seed >> n >> m >> initial_n >> params;
      GraphRecord& rec = dataset.records[id];
      rec.prov.family = family_from_name(family);
      rec.prov.seed = seed;
      rec.prov.initial_n = initial_n;
      rec.prov.params = params;
    }
  }
  parallel_for(total, 1, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      LoadedGraph lg = read_graph_file(
          out_path(config, "graphs/" + graph_file_name(static_cast<int>(i))));
      GraphRecord& rec = dataset.records[static_cast<std::size_t>(i)];
      rec.graph = std::move(lg.graph);
      rec.label = lg.family;
    }
  });
  dataset.split = read_split_file(config);
  if (static_cast<int>(dataset.split.size()) != total)
    throw std::runtime_error("split size does not match dataset");
  if (require_features) {
    compute_features(dataset);
    dataset.stats = read_feature_stats(config);
  }
  return dataset;
}

void stage_features(const PipelineConfig& config) {
  Dataset dataset = load_dataset(config, false);
  compute_features(dataset);
  dataset.stats = compute_feature_stats(dataset);
  ensure_dir(out_path(config, "features"));
  {
    auto out = open_out(out_path(config, "features/node_features.tsv"));
    out << "graph_id\tnode_id";
    for (const auto& name : node_feature_names()) out << '\t' << name;
    out << '\n';
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
      const auto& nf = dataset.records[i].node_feats;
      for (std::size_t u = 0; u < nf.size(); ++u) {
        out << i << '\t' << u;
        for (int c = 0; c < kNodeFeatureCount; ++c) out << '\t' << nf[u][c];
        out << '\n';
      }
    }
  }
  {
    auto out = open_out(out_path(config, "features/graph_features.tsv"));
    out << "graph_id\tfamily";
    for (const auto& name : graph_feature_names()) out << '\t' << name;
    out << "\tassortativity_degenerate\n";
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
      const GraphRecord& rec = dataset.records[i];
      auto gv = rec.graph_feats.values();
      out << i << '\t' << family_name(rec.label);
      for (int c = 0; c < kGraphFeatureCount; ++c) out << '\t' << gv[c];
      out << '\t' << (rec.graph_feats.assortativity_degenerate ? 1 : 0) << '\n';
    }
  }
  {
    std::vector<const Graph*> graphs;
    for (const auto& rec : dataset.records) graphs.push_back(&rec.graph);
    auto table = compute_candidate_table(graphs);
    auto out = open_out(out_path(config, "features/candidate_table.tsv"));
    out << "graph_id\tfamily";
    for (const auto& name : candidate_feature_names()) out << '\t' << name;
    out << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
      out << i << '\t' << family_name(dataset.records[i].label);
      for (int c = 0; c < kCandidateFeatureCount; ++c) out << '\t' << table[i][c];
      out << '\n';
    }
  }
  write_feature_stats(config, dataset.stats);
}

void stage_select(const PipelineConfig& config) {
  std::vector<int> labels;
  FeatureTable table = read_candidate_table(config, &labels);
  std::vector<int> split = read_split_file(config);
  if (split.size() != table.rows.size())
    throw std::runtime_error("split/candidate-table size mismatch");
  // Selection fits on the training split only.
  FeatureTable train_table;
  std::vector<int> train_labels;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (split[i] == kTrainSplit) {
      train_table.rows.push_back(table.rows[i]);
      train_labels.push_back(labels[i]);
    }
  }
  PruneOptions opts;
  opts.threshold = config.prune_threshold;
  opts.n_forests = config.selection_forests;
  opts.n_trees = config.selection_trees;
  std::vector<std::string> names(candidate_feature_names().begin(),
                                 candidate_feature_names().end());
  PruneResult result =
      prune_recursive(train_table, train_labels, names, opts, derive_seed(config.seed, 4000));
  ensure_dir(out_path(config, "selection"));
  {
    auto out = open_out(out_path(config, "selection/prune_trace.txt"));
    write_prune_trace(out, result.trace);
  }
  {
    auto out = open_out(out_path(config, "selection/retained_features.txt"));
    for (const auto& name : result.retained) out << name << '\n';
  }
}

void stage_tune(const PipelineConfig& config, const std::string& arch) {
  if (config.hpo_trials < 1) return;
  Dataset dataset = load_dataset(config, true);
  std::vector<Architecture> archs =
      arch == "all" ? architectures_of(config)
                    : std::vector<Architecture>{architecture_from_name(arch)};
  ensure_dir(out_path(config, "hpo"));
  for (Architecture a : archs) {
    TuneOptions topts;
    topts.n_trials = config.hpo_trials;
    topts.trial_epochs = config.hpo_epochs;
    topts.batch_size = config.batch_size;
    TuneResult result = tune(a, dataset, topts, derive_seed(config.seed, 8000));
    auto out = open_out(out_path(config, std::string("hpo/trials_") + architecture_name(a) + ".tsv"));
    write_trial_table(out, result.trials);
    save_best_config(config, result.best);
  }
}

void stage_train(const PipelineConfig& config, const std::string& arch) {
  if (arch == "SVM" || arch == "svm") {
    train_svm_baseline(config);
    return;
  }
  Dataset dataset = load_dataset(config, true);
  std::vector<Architecture> archs =
      arch == "all" ? architectures_of(config)
                    : std::vector<Architecture>{architecture_from_name(arch)};
  for (Architecture a : archs) train_one_gnn(config, dataset, a);
  if (arch == "all") train_svm_baseline(config);
}

void stage_evaluate(const PipelineConfig& config, const std::string& arch) {
  Dataset dataset = load_dataset(config, true);
  Architecture a = architecture_from_name(arch);
  ModelConfig mc = read_best_config(config, a);
  GraphClassifier model(mc, 0);
  model.load(out_path(config, std::string("models/") + architecture_name(a)));
  EvalResult val = evaluate(model, dataset, dataset.indices_of(kValSplit), config.batch_size);
  ConfusionMatrix cm = confusion(val.true_labels, val.predictions);
  ensure_dir(out_path(config, "metrics"));
  {
    auto out = open_out(out_path(config, std::string("metrics/metrics_") + architecture_name(a) + ".txt"));
    out << "architecture = " << architecture_name(a) << '\n';
    write_metrics(out, metrics_from_confusion(cm));
  }
  {
    auto out = open_out(out_path(config, std::string("metrics/confusion_") + architecture_name(a) + ".tsv"));
    write_confusion(out, cm);
  }
}

void stage_report(const PipelineConfig& config) {
  struct Row {
    std::string name;
    double accuracy;
    double macro_f1;
  };
  std::vector<Row> rows;
  std::vector<std::string> names = config.architectures;
  names.push_back("SVM");
  for (const std::string& name : names) {
    const std::string path = out_path(config, "metrics/metrics_" + name + ".txt");
    if (!fs::exists(path)) continue;
    std::ifstream in(path);
    MetricsReport r = read_metrics(in);
    rows.push_back({name, r.accuracy, r.macro_f1});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.accuracy > b.accuracy; });
  ensure_dir(out_path(config, "reports"));
  auto out = open_out(out_path(config, "reports/summary.txt"));
  out << "model\taccuracy\tmacro_f1\n";
  out.precision(6);
  for (const Row& r : rows)
    out << r.name << '\t' << r.accuracy << '\t' << r.macro_f1 << '\n';
}

void write_manifest(const PipelineConfig& config) {
  Config manifest = pipeline_config_to(config);
  manifest.set("tool", "name", "graphfam");
  manifest.set("tool", "version", kToolVersion);

  // Per-family size table recomputed from provenance.
  {
    auto in = open_in(out_path(config, "provenance.tsv"), "generate");
    std::string header;
    std::getline(in, header);
    struct Acc {
      std::int64_t min_n = 1 << 30, max_n = 0, sum_n = 0;
      std::int64_t min_m = std::int64_t(1) << 60, max_m = 0, sum_m = 0;
      int count = 0;
    };
    std::vector<Acc> acc(kNumFamilies);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      int id = 0, n = 0, initial_n = 0;
      std::string family, params;
      std::uint64_t seed = 0;
      std::int64_t m = 0;
      ls >> id >> family >> seed >> n >> m >> initial_n >> params;
      Acc& a = acc[static_cast<int>(family_from_name(family))];
      a.min_n = std::min<std::int64_t>(a.min_n, n);
      a.max_n = std::max<std::int64_t>(a.max_n, n);
      a.sum_n += n;
      a.min_m = std::min(a.min_m, m);
      a.max_m = std::max(a.max_m, m);
      a.sum_m += m;
      ++a.count;
      manifest.set("provenance", "g" + std::to_string(id),
                   family + " " + std::to_string(seed) + " " + std::to_string(n) + " " +
                       std::to_string(m) + " " + std::to_string(initial_n) + " " + params);
    }
    for (int f = 0; f < kNumFamilies; ++f) {
      if (acc[f].count == 0) continue;
      const Acc& a = acc[f];
      std::ostringstream os;
      os << a.max_n << ' ' << a.min_n << ' ' << a.sum_n / a.count << ' ' << a.max_m << ' '
         << a.min_m << ' ' << a.sum_m / a.count;
      manifest.set("family_sizes", family_name(static_cast<Family>(f)), os.str());
    }
  }

  const std::string retained_path = out_path(config, "selection/retained_features.txt");
  if (fs::exists(retained_path)) {
    std::string joined;
    for (const auto& name : read_retained(config)) {
      if (!joined.empty()) joined += ",";
      joined += name;
    }
    manifest.set("selection", "retained", joined);
  }
  const std::string best_path = out_path(config, "hpo/best_configs.txt");
  if (fs::exists(best_path)) {
    Config best = Config::load(best_path);
    for (const std::string& section : best.section_names()) {
      for (const auto& [k, v] : *best.section(section)) manifest.set(section, k, v);
    }
  }
  std::vector<std::string> names = config.architectures;
  names.push_back("SVM");
  for (const std::string& name : names) {
    if (fs::exists(out_path(config, "metrics/metrics_" + name + ".txt")))
      manifest.set("artifacts", "metrics_" + name, "metrics/metrics_" + name + ".txt");
    if (fs::exists(out_path(config, "metrics/confusion_" + name + ".tsv")))
      manifest.set("artifacts", "confusion_" + name, "metrics/confusion_" + name + ".tsv");
  }

  std::ostringstream body;
  manifest.write(body);
  manifest.set("hash", "content_fnv1a64", std::to_string(fnv1a64(body.str())));
  manifest.save(out_path(config, "manifest.txt"));
}

void run_all(const PipelineConfig& config) {
  auto run_stage = [](const char* stage, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("stage ") + stage + " failed: " + e.what());
    }
  };
  run_stage("generate", [&] { stage_generate(config); });
  run_stage("features", [&] { stage_features(config); });
  run_stage("select", [&] { stage_select(config); });
  run_stage("tune", [&] { stage_tune(config, "all"); });
  run_stage("train", [&] { stage_train(config, "all"); });
  run_stage("report", [&] { stage_report(config); });
  run_stage("manifest", [&] { write_manifest(config); });
}

}  // namespace graphfam
