// Copyright 2026 The modelid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Python bindings: parameter spaces, the pushing and structure simulators,
// GP regression, expected improvement, identification and the benchmark
// harness. Configurations cross the boundary as JSON-compatible dicts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modelid/acquisition.h"
#include "modelid/bench.h"
#include "modelid/bo.h"
#include "modelid/gp.h"
#include "modelid/push.h"
#include "modelid/rembo.h"
#include "modelid/structure.h"

namespace py = pybind11;

namespace modelid {
namespace {

nlohmann::json ToJson(const py::handle& obj) {
  const py::module_ json = py::module_::import("json");
  return nlohmann::json::parse(json.attr("dumps")(obj).cast<std::string>());
}

py::object FromJson(const nlohmann::json& j) {
  const py::module_ json = py::module_::import("json");
  return json.attr("loads")(j.dump());
}

py::dict ResultToDict(const IdentificationResult& r) {
  py::list history;
  for (const auto& e : r.history) {
    py::dict row;
    row["iteration"] = e.iteration;
    row["theta"] = e.theta;
    row["error"] = e.error;
    history.append(row);
  }
  py::dict out;
  out["best_theta"] = r.best_theta;
  out["best_error"] = r.best_error;
  out["best_so_far"] = r.BestSoFar();
  out["history"] = history;
  return out;
}

}  // namespace
}  // namespace modelid

PYBIND11_MODULE(_modelid, m) {
  using namespace modelid;
  m.doc() = "Black-box model identification toolkit";

  py::class_<ParameterSpace>(m, "ParameterSpace")
      .def(py::init<std::vector<std::string>, Vector, Vector, int>(),
           py::arg("names"), py::arg("lower"), py::arg("upper"),
           py::arg("grid_res") = 100)
      .def_property_readonly("dim", &ParameterSpace::dim)
      .def_property_readonly("names", &ParameterSpace::names)
      .def_property_readonly("lower", &ParameterSpace::lower)
      .def_property_readonly("upper", &ParameterSpace::upper)
      .def_property_readonly("grid_res", &ParameterSpace::grid_res)
      .def("normalize", &ParameterSpace::Normalize)
      .def("denormalize", &ParameterSpace::Denormalize)
      .def("contains", &ParameterSpace::Contains)
      .def("sample_uniform", &ParameterSpace::SampleUniform, py::arg("seed"),
           py::arg("n"))
      .def("to_dict", [](const ParameterSpace& s) { return FromJson(s.ToJson()); });

  m.def("push_displacement",
        [](double mass, double friction, double impulse) {
          return PushDisplacement({mass, friction}, impulse);
        },
        py::arg("m"), py::arg("mu"), py::arg("impulse"),
        "Sliding distance of a pushed block: (F t)^2 / (2 m^2 mu).");
  m.def("default_push_space", &DefaultPushSpace, py::arg("grid_res") = 100);
  m.def("default_structure_space", &DefaultStructureSpace,
        py::arg("grid_res") = 100);
  m.def("default_structure_truth", &DefaultStructureTruth);
  m.def("structure_param_names", [] { return StructureParams::Names(); });

  py::class_<GpSurrogate>(m, "GpSurrogate")
      .def_static(
          "fit",
          [](const std::vector<Vector>& inputs, const std::vector<double>& targets,
             double length_scale, double signal_var, double noise_var,
             std::optional<double> prior_mean) {
            const int dim = inputs.empty() ? 1 : static_cast<int>(inputs[0].size());
            return GpSurrogate::Fit(
                inputs, targets,
                KernelParams::Isotropic(dim, length_scale, signal_var, noise_var),
                prior_mean);
          },
          py::arg("inputs"), py::arg("targets"), py::arg("length_scale"),
          py::arg("signal_var") = 1.0, py::arg("noise_var") = 0.0,
          py::arg("prior_mean") = py::none())
      .def("predict",
           [](const GpSurrogate& gp, const Vector& x) {
             const auto p = gp.Predict(x);
             return py::make_tuple(p.mean, p.variance);
           })
      .def("log_marginal_likelihood", &GpSurrogate::LogMarginalLikelihood)
      .def_property_readonly("jitter", &GpSurrogate::jitter);

  m.def("expected_improvement", &ExpectedImprovement, py::arg("mean"),
        py::arg("variance"), py::arg("best"), py::arg("xi") = 0.0);

  m.def(
      "identify",
      [](const ErrorFunction& error, const ParameterSpace& space, int budget,
         std::uint64_t seed, int latent_dim) {
        BoOptions options;
        options.grid_res = space.grid_res();
        std::optional<RandomEmbedding> map;
        if (latent_dim > 0) map = MakeEmbedding(space, latent_dim, seed);
        return ResultToDict(Identify(error, space, map ? &*map : nullptr,
                                     BudgetSpec{budget, std::nullopt}, seed,
                                     options));
      },
      py::arg("error"), py::arg("space"), py::arg("budget"),
      py::arg("seed") = 0, py::arg("latent_dim") = 0,
      "Bayesian optimization of error(theta) over space. latent_dim > 0 "
      "searches a random linear embedding of that dimension.");
  m.def(
      "random_search",
      [](const ErrorFunction& error, const ParameterSpace& space, int budget,
         std::uint64_t seed) {
        return ResultToDict(
            RandomSearch(error, space, BudgetSpec{budget, std::nullopt}, seed));
      },
      py::arg("error"), py::arg("space"), py::arg("budget"), py::arg("seed") = 0);

  m.def("method_ids", &MethodIds);
  m.def(
      "default_config",
      [](const std::string& simulator) {
        return FromJson(ExperimentConfig::Defaults(simulator).ToJson());
      },
      py::arg("simulator"));
  m.def(
      "run_experiment",
      [](const py::dict& config) {
        const ExperimentConfig c = ExperimentConfig::FromJson(ToJson(config));
        ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = RunExperiment(c);
        }
        py::list summary;
        for (const auto& s : outcome.summary) {
          py::dict row;
          row["method"] = s.method;
          row["runs"] = s.runs;
          row["median_final_error"] = s.median_final_error;
          row["median_final_test_error"] = s.median_final_test_error;
          row["q25_final_test_error"] = s.q25_final_test_error;
          row["q75_final_test_error"] = s.q75_final_test_error;
          summary.append(row);
        }
        return summary;
      },
      py::arg("config"),
      "Runs a benchmark from a config dict (missing keys take the simulator "
      "defaults), writes the result files and returns the summary rows.");
}
