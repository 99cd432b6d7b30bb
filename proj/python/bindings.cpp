#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gnncl/checkpoint.hpp"
#include "gnncl/dataset.hpp"
#include "gnncl/graph.hpp"
#include "gnncl/metrics.hpp"
#include "gnncl/synthetic.hpp"
#include "gnncl/trainer.hpp"

namespace py = pybind11;
using namespace gnncl;

namespace {

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["tp"] = m.tp;
  d["tn"] = m.tn;
  d["fp"] = m.fp;
  d["fn"] = m.fn;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f"] = m.f;
  d["accuracy"] = m.accuracy;
  d["auc"] = m.auc ? py::object(py::float_(*m.auc)) : py::none();
  return d;
}

py::dict log_dict(const EpochLog& log) {
  py::dict d;
  d["epoch"] = log.epoch;
  d["loss_total"] = log.loss_total;
  d["loss_head"] = log.loss_head;
  d["loss_gnn"] = log.loss_gnn;
  d["loss_purifier"] = log.loss_purifier;
  d["p"] = log.p;
  d["dbar"] = log.dbar;
  d["seconds"] = log.seconds;
  return d;
}

std::vector<std::uint8_t> to_labels(const std::vector<int>& raw) {
  std::vector<std::uint8_t> out;
  out.reserve(raw.size());
  for (int v : raw) out.push_back(v != 0);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Camouflage-resistant fraud detection on multi-relation graphs";
  m.attr("__version__") = "0.1.0";

  py::class_<Relation>(m, "Relation")
      .def_readonly("name", &Relation::name)
      .def_readonly("edges", &Relation::edges)
      .def("__repr__", [](const Relation& r) {
        return "Relation(name='" + r.name +
               "', edges=" + std::to_string(r.edges.size()) + ")";
      });

  py::class_<MultiRelationGraph>(m, "Graph")
      .def_readonly("num_nodes", &MultiRelationGraph::num_nodes)
      .def_readonly("feature_dim", &MultiRelationGraph::feature_dim)
      .def_readonly("features", &MultiRelationGraph::features)
      .def_property_readonly("labels",
                             [](const MultiRelationGraph& g) {
                               std::vector<int> out(g.labels.begin(),
                                                    g.labels.end());
                               return out;
                             })
      .def_readonly("relations", &MultiRelationGraph::relations)
      .def("total_edges", &MultiRelationGraph::total_edges)
      .def("validate", &MultiRelationGraph::validate)
      .def("__repr__", [](const MultiRelationGraph& g) {
        return "Graph(nodes=" + std::to_string(g.num_nodes) +
               ", features=" + std::to_string(g.feature_dim) +
               ", relations=" + std::to_string(g.relations.size()) + ")";
      });

  m.def(
      "generate_synthetic",
      [](std::size_t num_nodes, std::size_t feature_dim, double fraud_ratio,
         std::size_t relation_count, double intra_prob, double camouflage_rate,
         std::uint64_t seed) {
        SyntheticConfig cfg;
        cfg.num_nodes = num_nodes;
        cfg.feature_dim = feature_dim;
        cfg.fraud_ratio = fraud_ratio;
        cfg.relation_count = relation_count;
        cfg.intra_prob = intra_prob;
        cfg.camouflage_rate = camouflage_rate;
        cfg.seed = seed;
        cfg.validate();
        return generate_synthetic(cfg);
      },
      py::arg("num_nodes") = 1000, py::arg("feature_dim") = 16,
      py::arg("fraud_ratio") = 0.1, py::arg("relation_count") = 3,
      py::arg("intra_prob") = 0.01, py::arg("camouflage_rate") = 0.0,
      py::arg("seed") = 1,
      "Two-blob attributed graph with homophilous edges and optional "
      "fraud-edge camouflage.");

  m.def("load_graph", &load_graph, py::arg("directory"));
  m.def("save_graph", &save_graph, py::arg("graph"), py::arg("directory"));
  m.def(
      "fingerprint_dataset",
      [](const std::string& dir) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(
                          fingerprint_dataset(dir)));
        return std::string(buf);
      },
      py::arg("directory"), "Hex digest of the on-disk dataset files.");
  m.def("standardize_features", &standardize_features, py::arg("graph"),
        "In place: per-column zero mean, unit variance.");

  py::class_<DataSplit>(m, "DataSplit")
      .def_readonly("train", &DataSplit::train)
      .def_readonly("test", &DataSplit::test)
      .def_readonly("train_pos", &DataSplit::train_pos);
  m.def("split_stratified", &split_stratified, py::arg("graph"),
        py::arg("train_ratio"), py::arg("seed"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("layers", &TrainConfig::layers)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("tau", &TrainConfig::tau)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("init_threshold", &TrainConfig::init_threshold)
      .def_readwrite("hidden_dim", &TrainConfig::hidden_dim)
      .def_readwrite("train_ratio", &TrainConfig::train_ratio)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("model", &TrainConfig::model)
      .def_readwrite("no_reinforcer", &TrainConfig::no_reinforcer)
      .def_readwrite("fixed_weight", &TrainConfig::fixed_weight)
      .def_readwrite("standardize_features",
                     &TrainConfig::standardize_features)
      .def_readwrite("purifier_hidden", &TrainConfig::purifier_hidden)
      .def_readwrite("num_kernels", &TrainConfig::num_kernels)
      .def_readwrite("conv_half_width", &TrainConfig::conv_half_width)
      .def_readwrite("chunks", &TrainConfig::chunks)
      .def_readwrite("rnn_hidden", &TrainConfig::rnn_hidden)
      .def_readwrite("cell", &TrainConfig::cell)
      .def("validate", &TrainConfig::validate);

  py::class_<Trainer>(m, "Trainer")
      .def(py::init<const MultiRelationGraph&, DataSplit, TrainConfig>(),
           py::arg("graph"), py::arg("split"), py::arg("config"),
           py::keep_alive<1, 2>())
      .def("run_epoch", [](Trainer& t) { return log_dict(t.run_epoch()); })
      .def("run_all",
           [](Trainer& t) {
             py::list out;
             for (const EpochLog& log : t.run_all()) out.append(log_dict(log));
             return out;
           })
      .def("predict", &Trainer::predict, py::arg("nodes"),
           "Fraud probabilities for sorted, unique node ids.")
      .def(
          "evaluate",
          [](const Trainer& t, const std::vector<std::uint32_t>& nodes) {
            return metrics_dict(t.evaluate(nodes));
          },
          py::arg("nodes"))
      .def("evaluate_test",
           [](const Trainer& t) { return metrics_dict(t.evaluate_test()); })
      .def(
          "save_checkpoint",
          [](const Trainer& t, const std::string& path) {
            save_checkpoint(path, t.model(), t.controller(), t.config());
          },
          py::arg("path"))
      .def_property_readonly(
          "config", [](const Trainer& t) { return t.config(); })
      .def_property_readonly("split",
                             [](const Trainer& t) { return t.split(); })
      .def_property_readonly("thresholds", [](const Trainer& t) {
        return t.controller() ? t.controller()->thresholds()
                              : std::vector<std::vector<double>>{};
      });

  m.def(
      "checkpoint_config",
      [](const std::string& path) { return load_checkpoint(path).config; },
      py::arg("path"), "The training configuration stored in a checkpoint.");
  m.def(
      "load_trainer",
      [](const std::string& path, const MultiRelationGraph& g) {
        Checkpoint ckpt = load_checkpoint(path);
        DataSplit split =
            split_stratified(g, ckpt.config.train_ratio, ckpt.config.seed);
        // Heap-construct in place: Trainer wires internal references to its
        // own members, so it must never be moved after construction.
        return std::make_unique<Trainer>(g, std::move(split), ckpt.config,
                                         std::move(ckpt.model),
                                         std::move(ckpt.controller));
      },
      py::arg("path"), py::arg("graph"), py::keep_alive<0, 2>(),
      "Restore a trainer from a checkpoint against an already-prepared "
      "graph (apply standardize_features first when the stored config asks "
      "for it).");

  m.def(
      "compute_metrics",
      [](const std::vector<double>& scores, const std::vector<int>& labels,
         double threshold) {
        return metrics_dict(compute_metrics(scores, to_labels(labels),
                                            threshold));
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
}
