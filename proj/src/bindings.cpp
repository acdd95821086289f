#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbcast/scenario.hpp"

namespace py = pybind11;
using namespace qbcast;

namespace {

ScenarioConfig config_from_json_text(const std::string& text) {
  return parse_config(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_qbcast, m) {
  m.doc() = "Deterministic simulator for entanglement-assisted broadcasting protocols";

  py::enum_<Mode>(m, "Mode")
      .value("ENUMERATE", Mode::Enumerate)
      .value("SAMPLE", Mode::Sample);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("scenario", &ScenarioConfig::scenario)
      .def_readwrite("mode", &ScenarioConfig::mode)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("trials", &ScenarioConfig::trials)
      .def_property(
          "params",
          [](const ScenarioConfig& c) { return c.params.dump(); },
          [](ScenarioConfig& c, const std::string& text) {
            c.params = nlohmann::json::parse(text);
          },
          "Scenario parameters as a JSON object string");

  py::class_<Report>(m, "Report")
      .def_readonly("passed", &Report::passed)
      .def("to_jsonl", &Report::to_jsonl)
      .def_property_readonly("summary",
                             [](const Report& r) { return r.summary.dump(); })
      .def_property_readonly("records", [](const Report& r) {
        std::vector<std::string> out;
        out.reserve(r.records.size());
        for (const auto& rec : r.records) out.push_back(rec.dump());
        return out;
      });

  m.def("parse_config", &config_from_json_text, py::arg("json_text"),
        "Parse a scenario config from JSON text");
  m.def("run_scenario", &run_scenario, py::arg("config"),
        py::arg("verbose_transcript") = false,
        "Run a named scenario and return its report");
  m.def("list_scenarios", []() {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& info : list_scenarios()) {
      out.emplace_back(info.name, info.description, info.param_schema.dump());
    }
    return out;
  });
}
