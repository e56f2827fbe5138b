#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mhasim/config.hpp"
#include "mhasim/engine.hpp"
#include "mhasim/experiment.hpp"
#include "mhasim/throttle.hpp"
#include "mhasim/workload.hpp"

namespace py = pybind11;
using namespace mhasim;

namespace {

SimConfig make_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  SimConfig cfg = path.empty() ? SimConfig::defaults() : read_config_file(path);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

OperatorShape make_shape(const std::string& model, std::uint64_t seqlen) { return model_preset(model, seqlen); }

}  // namespace

PYBIND11_MODULE(_mhasim, m) {
  m.doc() = "Cycle-level LLC / MSHR contention simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<MappingError>(m, "MappingError", PyExc_ValueError);
  py::register_exception<TraceError>(m, "TraceError", PyExc_RuntimeError);
  py::register_exception<DeadlockError>(m, "DeadlockError", PyExc_RuntimeError);

  m.def("default_config", [] { return SimConfig::defaults().to_map(); });
  m.def(
      "parse_config", [](const std::string& text) { return parse_config(text).to_map(); }, py::arg("text"));
  m.def(
      "make_config",
      [](const std::string& path, const std::map<std::string, std::string>& overrides) {
        return format_config(make_config(path, overrides));
      },
      py::arg("path") = "", py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "logit_mapping",
      [](const std::string& model, std::uint64_t seqlen, std::uint32_t cores, std::uint32_t tb_lines) {
        return format_mapping(build_logit_mapping(make_shape(model, seqlen), cores, tb_lines));
      },
      py::arg("model"), py::arg("seqlen"), py::arg("cores") = 16, py::arg("tb_lines") = 1);

  m.def(
      "footprint",
      [](const std::string& model, std::uint64_t seqlen) {
        const OperatorShape s = make_shape(model, seqlen);
        const Footprint f = footprint(s, default_layouts(s));
        return std::map<std::string, std::uint64_t>{
            {"q_bytes", f.q_bytes}, {"k_bytes", f.k_bytes}, {"out_bytes", f.out_bytes}, {"unique_lines", f.unique_lines}};
      },
      py::arg("model"), py::arg("seqlen"));

  m.def(
      "generate",
      [](const std::string& model, std::uint64_t seqlen, const std::string& out, std::uint32_t cores,
         std::uint32_t tb_lines, const std::string& mapping) {
        const OperatorShape s = make_shape(model, seqlen);
        s.validate(64);
        const MappingSpec spec = mapping.empty() ? build_logit_mapping(s, cores, tb_lines) : parse_mapping(mapping);
        if (auto diags = validate_mapping(s, spec); !diags.empty()) throw MappingError("mapping rejected: " + diags.front());
        const auto traces = generate_traces(s, spec, default_layouts(s), {cores, 64, kVectorElems});
        std::size_t blocks = 0;
        for (const auto& t : traces) blocks += t.size();
        write_trace_set(out, traces,
                        {{"workload", model + "-L" + std::to_string(seqlen)},
                         {"shape", {{"H", s.H}, {"G", s.G}, {"L", s.L}, {"D", s.D}, {"elem_bytes", s.elem_bytes}}},
                         {"line_size", 64},
                         {"mapping", format_mapping(spec)}});
        return blocks;
      },
      py::arg("model"), py::arg("seqlen"), py::arg("out"), py::arg("cores") = 16, py::arg("tb_lines") = 1,
      py::arg("mapping") = "");

  m.def(
      "run_json",
      [](const std::string& traces, const std::string& config, const std::map<std::string, std::string>& overrides) {
        const SimConfig cfg = make_config(config, overrides);
        TraceSet ts = read_trace_set(traces);
        py::gil_scoped_release release;
        return dump_json(run(cfg, std::move(ts.cores)));
      },
      py::arg("traces"), py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "sweep",
      [](const std::string& plan_path, unsigned jobs) {
        const ExperimentPlan plan = read_plan_file(plan_path);
        py::gil_scoped_release release;
        return sweep_csv(plan, execute_plan(plan, jobs));
      },
      py::arg("plan"), py::arg("jobs") = 0);

  m.def(
      "report", [](const std::string& csv, const std::string& baseline) { return format_report(build_report(csv, baseline)); },
      py::arg("csv"), py::arg("baseline"));

  m.def(
      "classify_contention", [](double tcs) { return std::string(to_string(classify_contention(tcs))); },
      py::arg("tcs"));
  m.def(
      "step_gear",
      [](std::uint32_t gear, const std::string& status, std::uint32_t max_gear) {
        static const std::map<std::string, Contention> names = {{"low", Contention::Low},
                                                                {"normal", Contention::Normal},
                                                                {"high", Contention::High},
                                                                {"extremely_high", Contention::ExtremelyHigh}};
        const auto it = names.find(status);
        if (it == names.end()) throw ConfigError("unknown contention status '" + status + "'");
        return step_gear({gear, max_gear}, it->second).gear;
      },
      py::arg("gear"), py::arg("status"), py::arg("max_gear") = 4);

}
