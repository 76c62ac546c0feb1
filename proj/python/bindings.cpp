/* Copyright 2026 The MetaInf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "metainf/cli.h"
#include "metainf/error.h"
#include "metainf/json_io.h"
#include "metainf/protocol.h"
#include "metainf/selection.h"
#include "metainf/service.h"
#include "metainf/synth.h"

namespace py = pybind11;
using nlohmann::json;

namespace {

using metainf::Snapshot;

// Python-side handle on a trained snapshot. Values cross the boundary as JSON
// text; the pure-Python package converts to and from dicts.
struct PySelector {
  std::shared_ptr<const Snapshot> snap;

  std::string kind() const { return metainf::ToString(snap->selector->kind()); }

  std::string Rank(const std::string& task, const std::string& hw) const {
    auto r = snap->selector->RankMethods(json::parse(task).get<metainf::TaskProfile>(),
                                         json::parse(hw).get<metainf::HardwareProfile>());
    return json(r).dump();
  }

  std::string Select(const std::string& task, const std::string& hw,
                     std::optional<double> budget) const {
    metainf::SelectionRequest req{
        json::parse(task).get<metainf::TaskProfile>(),
        json::parse(hw).get<metainf::HardwareProfile>(),
        budget ? metainf::Budget{*budget} : metainf::Budget::Unlimited(), snap->selector};
    json out = metainf::SelectionToWire(metainf::Select(req));
    out["model_version"] = snap->model_version;
    return out.dump();
  }
};

std::shared_ptr<metainf::EmbeddingProvider> Fallback(int raw_dim) {
  metainf::EmbeddingProviderSpec spec;
  spec.raw_dim = raw_dim;
  return std::make_shared<metainf::CachingProvider>(metainf::MakeProvider(spec));
}

metainf::PromptStyle Style(const std::string& s) {
  auto p = metainf::ParsePromptStyle(s);
  if (!p) throw metainf::UsageError("unknown prompt style '" + s + "'");
  return *p;
}

}  // namespace

PYBIND11_MODULE(_metainf, m) {
  m.doc() = "Native core of the metainf package";

  static py::exception<metainf::Error> error(m, "Error");
  static py::exception<metainf::UsageError> usage(m, "UsageError", error.ptr());
  static py::exception<metainf::DataError> data(m, "DataError", error.ptr());
  static py::exception<metainf::InfeasibleError> infeasible(m, "InfeasibleError",
                                                            error.ptr());
  static py::exception<metainf::ProviderError> provider(m, "ProviderError", error.ptr());
  static py::exception<metainf::IoError> io(m, "IoError", error.ptr());
  static py::exception<metainf::IntegrityError> integrity(m, "IntegrityError",
                                                          error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const metainf::InfeasibleError& e) {
      py::object inst = py::reinterpret_borrow<py::object>(infeasible.ptr())(e.what());
      inst.attr("cheapest_cost") = e.cheapest_cost();
      inst.attr("budget") = e.budget();
      PyErr_SetObject(infeasible.ptr(), inst.ptr());
    } catch (const metainf::UsageError& e) {
      usage(e.what());
    } catch (const metainf::DataError& e) {
      data(e.what());
    } catch (const metainf::ProviderError& e) {
      provider(e.what());
    } catch (const metainf::IoError& e) {
      io(e.what());
    } catch (const metainf::IntegrityError& e) {
      integrity(e.what());
    } catch (const metainf::Error& e) {
      error(e.what());
    } catch (const json::exception& e) {
      data(e.what());
    }
  });

  py::class_<PySelector>(m, "Selector")
      .def_property_readonly("kind", &PySelector::kind)
      .def_property_readonly("model_version",
                             [](const PySelector& s) { return s.snap->model_version; })
      .def("to_json", [](const PySelector& s) { return s.snap->model.dump(); })
      .def("rank", &PySelector::Rank, py::arg("task"), py::arg("hardware"))
      .def("select", &PySelector::Select, py::arg("task"), py::arg("hardware"),
           py::arg("budget") = py::none());

  m.def(
      "load_selector",
      [](const std::string& model, int raw_dim) {
        return PySelector{metainf::MakeSnapshot(metainf::LoadSelector(
            json::parse(model), Fallback(raw_dim), metainf::SynthOracleFactory()))};
      },
      py::arg("model"), py::arg("raw_dim") = 384);

  m.def(
      "train",
      [](const std::string& records, const std::string& catalog, const std::string& kind,
         const std::string& style, int rank) {
        py::gil_scoped_release nogil;
        auto k = metainf::ParseSelectorKind(kind);
        if (!k) throw metainf::UsageError("unknown selector kind '" + kind + "'");
        metainf::SelectorSpec spec;
        spec.kind = *k;
        metainf::EmbeddingConfig emb{Style(style), rank, {}};
        auto out = metainf::TrainFromRecords(metainf::RecordStore::Load(records),
                                             metainf::Catalog::Load(catalog), spec, emb,
                                             Fallback(emb.provider.raw_dim));
        return PySelector{out.snapshot};
      },
      py::arg("records"), py::arg("catalog"), py::arg("selector") = "metainf",
      py::arg("style") = "rich", py::arg("rank") = 64);

  m.def(
      "synth_oracle",
      [](uint64_t seed) {
        auto spec = metainf::DefaultSynthSpec();
        spec.seed = seed;
        return PySelector{metainf::MakeSnapshot(metainf::MakeSynthOracle(spec))};
      },
      py::arg("seed") = 7);

  m.def(
      "evaluate",
      [](int trials, uint64_t seed, uint64_t synth_seed, const std::string& style,
         int rank) {
        py::gil_scoped_release nogil;
        auto spec = metainf::DefaultSynthSpec();
        spec.seed = synth_seed;
        metainf::ExperimentConfig cfg;
        cfg.embedding.style = Style(style);
        cfg.embedding.rank = rank;
        auto rep = metainf::RunExperiment(cfg, metainf::GenerateSynthetic(spec),
                                          Fallback(cfg.embedding.provider.raw_dim),
                                          trials, seed);
        return rep.ToJson().dump();
      },
      py::arg("trials") = 1000, py::arg("seed") = 7, py::arg("synth_seed") = 7,
      py::arg("style") = "rich", py::arg("rank") = 64);

  m.def(
      "estimate_cost",
      [](const std::string& hw, double runtime_s) {
        return metainf::EstimateCost(json::parse(hw).get<metainf::HardwareProfile>(),
                                     runtime_s)
            .amount;
      },
      py::arg("hardware"), py::arg("runtime_s"));

  m.def(
      "fallback_embed",
      [](const std::string& text, int raw_dim) {
        return metainf::FallbackEmbed(text, raw_dim).values;
      },
      py::arg("text"), py::arg("raw_dim") = 384);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"metainf"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release nogil;
          code = metainf::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
