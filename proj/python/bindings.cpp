// Python face of the library: dataset synthesis, config handling, and the
// train/evaluate entry points. Heavy calls drop the GIL.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "driftgen/config.hpp"
#include "driftgen/data.hpp"
#include "driftgen/errors.hpp"
#include "driftgen/eval.hpp"
#include "driftgen/experiment.hpp"
#include "driftgen/net.hpp"
#include "driftgen/serialize.hpp"
#include "driftgen/trainer.hpp"

namespace py = pybind11;
using namespace driftgen;

namespace {

// Copies a buffer into a fresh owned array. The shape always travels as an
// explicit vector: the braced and count forms of the array_t constructor
// build stride-0 views on the pybind11 shipped with this distro.
py::array_t<double> owned_array(std::vector<py::ssize_t> shape,
                                const double* values) {
  return py::array_t<double>(std::move(shape), values);
}

py::dict dataset_to_dict(const DomainDataset& ds) {
  const auto n = static_cast<py::ssize_t>(ds.size());
  const auto d = static_cast<py::ssize_t>(ds.feature_dim());
  py::array_t<double> features = owned_array({n, d}, ds.features.data.data());
  py::array_t<double> labels = owned_array({n}, ds.labels.data.data());
  py::dict out;
  out["features"] = features;
  out["labels"] = labels;
  out["domain_index"] = ds.domain_index;
  out["task"] = ds.task == TaskKind::kClassification ? "classification"
                                                     : "regression";
  return out;
}

py::list datasets_to_list(const std::vector<DomainDataset>& domains) {
  py::list out;
  for (const DomainDataset& ds : domains) out.append(dataset_to_dict(ds));
  return out;
}

py::dict stats_to_dict(const MethodStats& stats) {
  py::dict out;
  out["mean"] = stats.mean;
  out["stddev"] = stats.stddev;
  out["median"] = stats.median;
  out["values"] = stats.values;
  return out;
}

}  // namespace

PYBIND11_MODULE(_driftgen, m) {
  m.doc() = "Temporal drift experiments: a recurrent generator writes the "
            "predictive network's parameters one domain ahead.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("version", [] { return std::string(kDriftgenVersion); },
        "Library version string.");

  m.def(
      "canonical_config",
      [](const std::string& json_text) {
        return canonical_json(parse_config(json_text));
      },
      py::arg("json_text"),
      "Validates a config and returns its canonical key-sorted form.");

  m.def(
      "config_hash",
      [](const std::string& json_text) {
        return config_hash(parse_config(json_text));
      },
      py::arg("json_text"),
      "32-bit hash of the canonical config; stable across key order.");

  m.def(
      "make_moons",
      [](std::size_t num_domains, std::size_t n_per_domain,
         double step_degrees, double noise_sigma, std::uint64_t seed) {
        return datasets_to_list(make_rotated_moons(
            num_domains, n_per_domain, step_degrees, noise_sigma, seed));
      },
      py::arg("num_domains"), py::arg("n_per_domain"),
      py::arg("step_degrees") = 18.0, py::arg("noise_sigma") = 0.1,
      py::arg("seed") = 0,
      "Rotating crescent-pair stream, one dict per domain.");

  m.def(
      "make_drifting_regression",
      [](std::size_t num_domains, std::size_t n_per_domain, double drift_rate,
         double noise_sigma, std::uint64_t seed) {
        return datasets_to_list(make_drifting_regression(
            num_domains, n_per_domain, drift_rate, noise_sigma, seed));
      },
      py::arg("num_domains"), py::arg("n_per_domain"),
      py::arg("drift_rate") = 0.2, py::arg("noise_sigma") = 0.0,
      py::arg("seed") = 0,
      "Scalar regression stream whose slope drifts with the domain index.");

  m.def(
      "run_method",
      [](const std::string& json_text, const std::string& method,
         std::uint64_t seed, const std::string& out_dir) {
        const ExperimentConfig cfg = parse_config(json_text);
        const Method m_id = method_from_name(method);
        RunResult result;
        {
          py::gil_scoped_release release;
          const std::vector<DomainDataset> domains =
              experiment_domains(cfg, seed);
          result = run_method(cfg, m_id, seed, domains, out_dir);
        }
        py::dict out;
        out["method"] = method_name(result.method);
        out["seed"] = result.seed;
        out["future_metric"] = result.future_metric;
        return out;
      },
      py::arg("config_json"), py::arg("method"), py::arg("seed"),
      py::arg("out_dir"),
      "Trains one method for one seed, writes its artifacts into out_dir, "
      "and returns the held-out metric.");

  m.def(
      "run_suite",
      [](const std::string& json_text, const std::string& out_dir) {
        const ExperimentConfig cfg = parse_config(json_text);
        SuiteResult suite;
        {
          py::gil_scoped_release release;
          suite = run_suite(cfg, out_dir);
        }
        py::dict stats;
        for (const MethodStats& s : suite.stats) {
          stats[method_name(s.method)] = stats_to_dict(s);
        }
        py::dict out;
        out["stats"] = stats;
        out["table"] = format_table(cfg, suite);
        return out;
      },
      py::arg("config_json"), py::arg("out_dir") = std::string(),
      "Runs every configured method over every seed; returns per-method "
      "statistics and the formatted comparison table.");

  m.def(
      "predict_future_params",
      [](const std::string& checkpoint_path) {
        TrainedModel model;
        ParamVector future;
        {
          py::gil_scoped_release release;
          model = load_checkpoint(checkpoint_path);
          future = predict_future(model);
        }
        return owned_array({static_cast<py::ssize_t>(future.values.size())},
                           future.values.data());
      },
      py::arg("checkpoint_path"),
      "Loads a trained checkpoint and rolls the recurrence one domain "
      "ahead, returning the flat parameter vector.");
}
