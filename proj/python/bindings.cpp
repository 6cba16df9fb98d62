// Python view of the simulator: model, metrics, aggregation and the
// experiment runner. Numeric arrays cross as numpy via pybind11/eigen.

#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fednids/experiment.hpp"
#include "fednids/federation.hpp"
#include "fednids/metrics.hpp"
#include "fednids/model.hpp"

namespace py = pybind11;
using namespace fednids;

namespace {

py::dict report_dict(const EvaluationReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["detection_rate"] = r.detection_rate;
  d["false_alarm_rate"] = r.false_alarm_rate;
  d["auc"] = r.auc;
  d["f1"] = r.f1;
  d["confusion"] = py::dict(py::arg("tp") = r.confusion.tp, py::arg("tn") = r.confusion.tn,
                            py::arg("fp") = r.confusion.fp, py::arg("fn") = r.confusion.fn);
  d["per_category_dr"] = r.per_category.rates;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated-learning simulator for NetFlow intrusion detection";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<MetricsError>(m, "MetricsError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("version", [] { return std::string(version()); });

  py::class_<ModelParameters>(m, "ModelParameters")
      .def_property_readonly("parameter_count", &ModelParameters::parameter_count)
      .def_property_readonly("widths",
                             [](const ModelParameters& p) {
                               std::vector<Eigen::Index> w;
                               if (!p.layers.empty()) w.push_back(p.layers.front().fan_in());
                               for (const auto& l : p.layers) w.push_back(l.fan_out());
                               return w;
                             })
      .def("flatten", &ModelParameters::flatten)
      .def("to_bytes",
           [](const ModelParameters& p) {
             const auto b = serialize_parameters(p);
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def_static("from_bytes",
                  [](const py::bytes& data) {
                    const std::string s = data;
                    return deserialize_parameters(
                        {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
                  })
      .def("__eq__", [](const ModelParameters& a, const ModelParameters& b) { return a == b; });

  m.def("init_model", [](std::uint64_t seed) { return init_model(seed); }, py::arg("seed"),
        "Glorot-uniform 39-12-6-3-1 network with zero biases.");
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def(
      "predict",
      [](const ModelParameters& p, const Eigen::Ref<const FeatureMatrix>& x) { return predict(p, x); },
      py::arg("params"), py::arg("features"), "Attack probabilities, one per row.");

  m.def(
      "binary_metrics",
      [](std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
        const auto b = binary_metrics({tp, tn, fp, fn});
        py::dict d;
        d["accuracy"] = b.accuracy;
        d["detection_rate"] = b.detection_rate;
        d["false_alarm_rate"] = b.false_alarm_rate;
        d["f1"] = b.f1;
        return d;
      },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def(
      "auc",
      [](const std::vector<int>& labels, const Eigen::VectorXd& scores) { return auc(labels, scores); },
      py::arg("labels"), py::arg("scores"));

  m.def(
      "fedavg",
      [](const std::vector<std::pair<ModelParameters, std::size_t>>& clients) {
        std::vector<ClientUpdate> updates;
        for (std::size_t i = 0; i < clients.size(); ++i) {
          updates.push_back({"client" + std::to_string(i), clients[i].first, clients[i].second, 0.0});
        }
        return fedavg_aggregate(updates);
      },
      py::arg("clients"), "Sample-weighted average of (params, sample_count) pairs.");

  m.def(
      "run_synthetic_federated",
      [](int orgs, std::size_t rows, double separation, std::uint64_t seed, int rounds, int epochs,
         int batch_size) {
        const auto data = make_synthetic_orgs(orgs, rows, separation, seed);
        FederatedConfig cfg;
        cfg.rounds = rounds;
        cfg.local.local_epochs = epochs;
        cfg.local.batch_size = batch_size;
        cfg.seed = seed;
        cfg.local.seed = seed;
        std::vector<RoundReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_federated(data, cfg);
        }
        py::list out;
        for (const auto& r : reports) {
          py::dict per_org;
          for (const auto& e : r.evaluations) per_org[py::str(e.org_id)] = report_dict(e.report);
          out.append(py::dict(py::arg("round") = r.round_index, py::arg("orgs") = per_org,
                              py::arg("model") = *r.global));
        }
        return out;
      },
      py::arg("orgs") = 2, py::arg("rows") = 2000, py::arg("separation") = 10.0, py::arg("seed") = 1,
      py::arg("rounds") = 10, py::arg("epochs") = 3, py::arg("batch_size") = 32,
      "Federated training on synthetic Gaussian organisations; one entry per round.");

  m.def("write_synthetic_datasets", &write_synthetic_datasets, py::arg("dir"), py::arg("orgs") = 2,
        py::arg("rows") = 2000, py::arg("separation") = 10.0, py::arg("seed") = 1,
        "Writes synthetic NetFlow CSVs plus experiment.cfg; returns the config path.");
  m.def("load_config", [](const std::filesystem::path& path) { return config_entries(load_config(path)); },
        py::arg("path"), "Resolved key/value settings of an experiment config file.");
  m.def(
      "run_experiment",
      [](const std::filesystem::path& config_path, std::optional<std::filesystem::path> output_dir,
         std::optional<std::uint64_t> seed, std::optional<std::string> scenario) {
        auto cfg = load_config(config_path);
        if (output_dir) cfg.output_dir = *output_dir;
        if (seed) cfg.seed = *seed;
        if (scenario) cfg.scenario = parse_scenario(*scenario);
        py::gil_scoped_release release;
        return run_experiment(cfg);
      },
      py::arg("config"), py::arg("output_dir") = py::none(), py::arg("seed") = py::none(),
      py::arg("scenario") = py::none(), "Runs an experiment; returns the CLI exit status.");
}
