#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "graphfam/features.hpp"
#include "graphfam/forest.hpp"
#include "graphfam/generators.hpp"
#include "graphfam/graph.hpp"
#include "graphfam/metrics.hpp"
#include "graphfam/parallel.hpp"
#include "graphfam/pipeline.hpp"
#include "graphfam/svm.hpp"

namespace py = pybind11;
using namespace graphfam;

namespace {

std::vector<std::vector<double>> node_features_list(const Graph& g) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : node_features(g)) rows.emplace_back(row.begin(), row.end());
  return rows;
}

std::vector<double> candidate_row_list(const Graph& g) {
  auto row = candidate_row(g);
  return {row.begin(), row.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Synthetic graph family classification benchmark (C++ core)";

  py::class_<Graph>(m, "Graph")
      .def(py::init([](int n, const std::vector<std::pair<int, int>>& edges) {
             return Graph::from_edges(n, edges);
           }),
           py::arg("n"), py::arg("edges"))
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def("degree", &Graph::degree, py::arg("node"))
      .def("neighbors",
           [](const Graph& g, int u) {
             auto nb = g.neighbors(u);
             return std::vector<int>(nb.begin(), nb.end());
           },
           py::arg("node"))
      .def("has_edge", &Graph::has_edge, py::arg("u"), py::arg("v"))
      .def("edges", &Graph::edges);

  m.def("set_workers",
        [](int workers) { ThreadPool::instance().set_workers(workers); },
        py::arg("workers"), "Resize the worker pool (0 = all cores)");

  m.def("generate_er",
        [](int n, double p, std::uint64_t seed) { return generate_er({n, p}, seed); },
        py::arg("n"), py::arg("p"), py::arg("seed"));
  m.def("generate_ws",
        [](int n, int k, double p, std::uint64_t seed) { return generate_ws({n, k, p}, seed); },
        py::arg("n"), py::arg("k"), py::arg("p"), py::arg("seed"));
  m.def("generate_ba",
        [](int n, int mm, std::uint64_t seed) { return generate_ba({n, mm}, seed); },
        py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def("generate_hk",
        [](int n, int mm, double p_triad, std::uint64_t seed) {
          return generate_hk({n, mm, p_triad}, seed);
        },
        py::arg("n"), py::arg("m"), py::arg("p_triad"), py::arg("seed"));
  m.def("generate_sbm",
        [](const std::vector<int>& block_sizes,
           const std::vector<std::vector<double>>& probs, std::uint64_t seed) {
          return generate_sbm({block_sizes, probs}, seed);
        },
        py::arg("block_sizes"), py::arg("probs"), py::arg("seed"));

  m.def("bfs_distances", &bfs_distances, py::arg("graph"), py::arg("source"));
  m.def("connected_components", &connected_components, py::arg("graph"));
  m.def("largest_connected_subgraph", &largest_connected_subgraph, py::arg("graph"));
  m.def("degree_sequence", &degree_sequence, py::arg("graph"));
  m.def("is_connected", &is_connected, py::arg("graph"));

  m.def("eigenvector_centrality",
        [](const Graph& g, double tol, int max_iter) {
          auto r = eigenvector_centrality(g, tol, max_iter);
          return py::make_tuple(r.scores, r.converged, r.iterations);
        },
        py::arg("graph"), py::arg("tol") = 1e-10, py::arg("max_iter") = 1000);
  m.def("closeness_centrality", &closeness_centrality, py::arg("graph"));
  m.def("degree_variance", &degree_variance, py::arg("graph"));
  m.def("local_clustering", &local_clustering, py::arg("graph"));
  m.def("average_clustering", &average_clustering, py::arg("graph"));
  m.def("transitivity", &transitivity, py::arg("graph"));
  m.def("degree_assortativity",
        [](const Graph& g) {
          auto r = degree_assortativity(g);
          return py::make_tuple(r.value, r.degenerate);
        },
        py::arg("graph"));
  m.def("core_numbers", &core_numbers, py::arg("graph"));
  m.def("node_features", &node_features_list, py::arg("graph"));
  m.def("candidate_row", &candidate_row_list, py::arg("graph"));
  m.def("candidate_feature_names", [] {
    return std::vector<std::string>(candidate_feature_names().begin(),
                                    candidate_feature_names().end());
  });

  m.def("prune_recursive",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           const std::vector<std::string>& names, double threshold, std::uint64_t seed) {
          FeatureTable table;
          table.rows = rows;
          PruneOptions opts;
          opts.threshold = threshold;
          PruneResult r = prune_recursive(table, labels, names, opts, seed);
          return py::make_tuple(r.retained, r.trace.passes.size());
        },
        py::arg("rows"), py::arg("labels"), py::arg("names"), py::arg("threshold") = 0.8,
        py::arg("seed") = 0);

  m.def("rbf_kernel",
        [](const std::vector<double>& x, const std::vector<double>& y, double gamma) {
          return rbf_kernel(x, y, gamma);
        },
        py::arg("x"), py::arg("y"), py::arg("gamma"));

  py::class_<SvmModel>(m, "SvmModel")
      .def("predict",
           [](const SvmModel& model, const std::vector<double>& x) { return model.predict(x); },
           py::arg("x"))
      .def("decision_values",
           [](const SvmModel& model, const std::vector<double>& x) {
             return model.decision_values(x);
           },
           py::arg("x"));
  m.def("fit_svm",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           double C, double gamma, std::uint64_t seed) {
          FeatureTable table;
          table.rows = rows;
          SvmOptions opts;
          opts.C = C;
          opts.gamma = gamma;
          opts.seed = seed;
          return fit_svm(table, labels, opts);
        },
        py::arg("rows"), py::arg("labels"), py::arg("C") = 1.0, py::arg("gamma") = 0.0,
        py::arg("seed") = 0);

  m.def("confusion",
        [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
          ConfusionMatrix cm = confusion(y_true, y_pred);
          std::vector<std::vector<std::int64_t>> rows;
          for (const auto& row : cm.counts) rows.emplace_back(row.begin(), row.end());
          return rows;
        },
        py::arg("y_true"), py::arg("y_pred"));
  m.def("metrics_from_confusion",
        [](const std::vector<std::vector<std::int64_t>>& rows) {
          ConfusionMatrix cm;
          for (int r = 0; r < kNumFamilies; ++r) {
            for (int c = 0; c < kNumFamilies; ++c) cm.counts[r][c] = rows.at(r).at(c);
          }
          MetricsReport rep = metrics_from_confusion(cm);
          py::dict out;
          out["accuracy"] = rep.accuracy;
          out["macro_precision"] = rep.macro_precision;
          out["macro_recall"] = rep.macro_recall;
          out["macro_f1"] = rep.macro_f1;
          py::list per_class;
          for (const auto& cm_class : rep.per_class) {
            py::dict d;
            d["precision"] = cm_class.precision;
            d["recall"] = cm_class.recall;
            d["f1"] = cm_class.f1;
            per_class.append(d);
          }
          out["per_class"] = per_class;
          return out;
        },
        py::arg("confusion"));

  m.def("run_pipeline",
        [](const std::string& config_path) {
          PipelineConfig config = pipeline_config_from(Config::load(config_path));
          run_all(config);
          return config.out_dir;
        },
        py::arg("config_path"), "Run the full pipeline from a config file");

  m.attr("family_names") = std::vector<std::string>{"ER", "WS", "BA", "HK", "SBM"};
  m.attr("report_order") = std::vector<std::string>{"ER", "BA", "WS", "SBM", "HK"};
  m.attr("__version__") = "0.1.0";
}
