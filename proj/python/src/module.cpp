// Python bindings for the core library.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cade/cli.hpp"
#include "cade/config.hpp"
#include "cade/error.hpp"
#include "cade/eval.hpp"
#include "cade/gradcheck_suite.hpp"
#include "cade/inference.hpp"
#include "cade/metrics.hpp"
#include "cade/model.hpp"
#include "cade/random.hpp"
#include "cade/training.hpp"

namespace py = pybind11;
using namespace cade;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

ConfigMap config_from(const std::map<std::string, std::string>& settings) {
  ConfigMap map;
  for (const auto& [k, v] : settings) map.set(k, v);
  return map;
}

Graph make_graph(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges,
                 const Array& features) {
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [u, v] : edges) es.push_back(make_edge(u, v));
  return Graph::from_edges(num_nodes, es, to_matrix(features));
}

std::pair<Model, std::vector<double>> fit_model(const Graph& g,
                                                const std::map<std::string, std::string>& settings) {
  const RunConfig rc = resolve(config_from(settings));
  ModelConfig mc = rc.spec.model;
  mc.encoder.feature_dim = g.feature_dim();
  FitResult result = [&] {
    py::gil_scoped_release release;
    return fit(g, mc, rc.spec.train);
  }();
  std::vector<double> losses;
  for (const EpochStats& e : result.log) losses.push_back(e.mean_loss);
  return {std::move(result.model), losses};
}

py::tuple embed(const Graph& g, const Model& model, const std::map<std::string, std::string>& settings) {
  const RunConfig rc = resolve(config_from(settings));
  InferenceConfig ic = rc.spec.infer;
  ic.seed = derive_seed(rc.spec.seed, "infer");
  EmbeddingMatrix emb = [&] {
    py::gil_scoped_release release;
    return generate_embeddings(g, model, ic);
  }();
  std::vector<bool> fallback(emb.fallback.begin(), emb.fallback.end());
  return py::make_tuple(to_array(emb.vectors), emb.coverage, fallback);
}

py::dict evaluate(const Graph& g, std::optional<std::vector<std::vector<int>>> labels,
                  const std::map<std::string, std::string>& settings) {
  const RunConfig rc = resolve(config_from(settings));
  Dataset data;
  data.graph = g;
  if (labels) {
    LabelSet ls;
    ls.classes = *labels;
    for (const auto& c : ls.classes)
      for (int x : c) ls.num_classes = std::max(ls.num_classes, static_cast<std::size_t>(x) + 1);
    data.labels = ls;
  }
  MetricReport r = [&] {
    py::gil_scoped_release release;
    return run_protocol(data, rc.method, rc.spec);
  }();
  py::list runs;
  for (const RunMetrics& m : r.runs) {
    py::dict x;
    x["seed"] = m.seed;
    x["micro_f1"] = m.micro_f1;
    x["auc"] = m.auc;
    x["ap"] = m.ap;
    runs.append(x);
  }
  py::dict out;
  out["method"] = to_string(r.method);
  out["task"] = to_string(r.task);
  out["mean"] = r.mean;
  out["std"] = r.stddev;
  out["mean_ap"] = r.mean_ap;
  out["runs"] = runs;
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"cade"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Inductive node embeddings with dual encoders";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("num_nodes"), py::arg("edges"), py::arg("features"))
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def_property_readonly("feature_dim", &Graph::feature_dim)
      .def_property_readonly("features", [](const Graph& g) { return to_array(g.features()); })
      .def("degree", &Graph::degree)
      .def("neighbors",
           [](const Graph& g, NodeId v) {
             const auto n = g.neighbors(v);
             return std::vector<NodeId>(n.begin(), n.end());
           })
      .def("edges",
           [](const Graph& g) {
             std::vector<std::pair<NodeId, NodeId>> out;
             for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
             return out;
           })
      .def("content_hash", [](const Graph& g) { return hex64(g.content_hash()); });

  m.def(
      "load_dataset",
      [](const std::filesystem::path& edges, const std::filesystem::path& features,
         std::optional<std::filesystem::path> labels) {
        Dataset d = load_dataset(edges, features, labels);
        std::optional<std::vector<std::vector<int>>> classes;
        if (d.labels) classes = d.labels->classes;
        return py::make_tuple(std::move(d.graph), classes);
      },
      py::arg("edges"), py::arg("features"), py::arg("labels") = py::none(),
      "Loads an edge list, a feature matrix and optional labels; returns (graph, labels).");

  py::class_<Model>(m, "Model")
      .def_property_readonly("mode", [](const Model& x) { return to_string(x.config.mode); })
      .def_property_readonly("num_candidates", [](const Model& x) { return x.config.num_candidates; })
      .def_property_readonly("embed_dim", [](const Model& x) { return x.config.encoder.embed_dim; })
      .def_property_readonly("uses_global_bias", [](const Model& x) { return x.bias.has_value(); })
      .def("hash", [](const Model& x) { return hex64(model_hash(x)); })
      .def("save", [](const Model& x, const std::filesystem::path& dir) { save_checkpoint(x, dir); });

  m.def("load_model", &load_checkpoint, py::arg("directory"));

  m.def("default_config", [] { return ConfigMap().values(); },
        "All configuration keys with their default values.");

  m.def("fit", &fit_model, py::arg("graph"), py::arg("config") = std::map<std::string, std::string>{},
        "Trains a model on `graph`; returns (model, per-epoch mean losses).");
  m.def("embed", &embed, py::arg("graph"), py::arg("model"),
        py::arg("config") = std::map<std::string, std::string>{},
        "Embeds every node; returns (vectors, coverage, fallback).");
  m.def("evaluate", &evaluate, py::arg("graph"), py::arg("labels") = py::none(),
        py::arg("config") = std::map<std::string, std::string>{},
        "Runs split, training, embedding and scoring for the configured method and task.");

  m.def("micro_f1", [](const std::vector<std::vector<int>>& pred, const std::vector<std::vector<int>>& truth) {
    return micro_f1(pred, truth);
  });
  m.def("roc_auc", [](const std::vector<double>& s, const std::vector<int>& y) { return roc_auc(s, y); });
  m.def("average_precision",
        [](const std::vector<double>& s, const std::vector<int>& y) { return average_precision(s, y); });

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        const GradCheckReport r = run_gradcheck_suite(seed);
        py::dict out;
        out["worst"] = r.worst;
        out["worst_name"] = r.worst_name;
        py::list entries;
        for (const auto& e : r.entries) entries.append(py::make_tuple(e.name, e.result.max_rel_error));
        out["entries"] = entries;
        return out;
      },
      py::arg("seed") = 7);

  m.def("run_cli", &cli, py::arg("args"), "Runs a command-line invocation; returns (exit code, stdout, stderr).");
}
