// mhasim command line: gen | run | sweep | report.
//
// Exit codes: 0 ok, 1 other failure, 2 config/mapping error, 3 trace error,
// 4 deadlock.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mhasim/config.hpp"
#include "mhasim/engine.hpp"
#include "mhasim/experiment.hpp"
#include "mhasim/workload.hpp"

using namespace mhasim;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kTrace = 3, kDeadlock = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

struct GenArgs {
  std::string model;
  std::uint64_t seqlen = 0;
  std::uint64_t H = 0, G = 0, D = 128, elem = 1;
  std::uint32_t cores = 16;
  std::uint32_t tb_lines = 1;
  std::uint32_t line = 64;
  std::string mapping;
  std::string out;
  std::string name;
};

int cmd_gen(const GenArgs& a) {
  OperatorShape shape;
  if (!a.model.empty()) {
    shape = model_preset(a.model, a.seqlen);
    shape.elem_bytes = a.elem;
  } else {
    if (a.H == 0 || a.G == 0) throw ConfigError("gen needs --model or both --heads and --group");
    shape = {a.H, a.G, a.seqlen, a.D, a.elem};
  }
  shape.validate(a.line);
  const MappingSpec mapping =
      a.mapping.empty() ? build_logit_mapping(shape, a.cores, a.tb_lines, a.line) : read_mapping_file(a.mapping);
  if (auto diags = validate_mapping(shape, mapping, a.line); !diags.empty()) {
    std::string msg = "mapping rejected:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw MappingError(msg);
  }
  const auto layouts = default_layouts(shape);
  const auto traces = generate_traces(shape, mapping, layouts, {a.cores, a.line, kVectorElems});

  std::string name = a.name;
  if (name.empty()) name = (a.model.empty() ? "custom" : a.model) + "-L" + std::to_string(shape.L);
  nlohmann::json manifest = {
      {"workload", name},
      {"shape", {{"H", shape.H}, {"G", shape.G}, {"L", shape.L}, {"D", shape.D}, {"elem_bytes", shape.elem_bytes}}},
      {"line_size", a.line},
      {"mapping", format_mapping(mapping)}};
  write_trace_set(a.out, traces, manifest);
  std::size_t blocks = 0;
  for (const auto& t : traces) blocks += t.size();
  std::cerr << "wrote " << traces.size() << " traces (" << blocks << " thread blocks) to " << a.out << '\n';
  return kOk;
}

struct RunArgs {
  std::string config;
  std::string traces;
  std::vector<std::string> sets;
  std::string out;
  std::string csv;
};

int cmd_run(const RunArgs& a) {
  SimConfig cfg = a.config.empty() ? SimConfig::defaults() : read_config_file(a.config);
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  TraceSet ts = read_trace_set(a.traces);
  const StatsRecord stats = run(cfg, std::move(ts.cores));
  write_out(a.out, dump_json(stats));
  if (!a.csv.empty()) {
    std::string text;
    const auto cols = csv_metric_columns();
    const auto vals = csv_metric_values(stats);
    for (std::size_t i = 0; i < cols.size(); ++i) text += (i ? "," : "") + cols[i];
    text += '\n';
    for (std::size_t i = 0; i < vals.size(); ++i) text += (i ? "," : "") + vals[i];
    text += '\n';
    write_out(a.csv, text);
  }
  return kOk;
}

int cmd_sweep(const std::string& plan_path, const std::string& out, unsigned jobs) {
  const ExperimentPlan plan = read_plan_file(plan_path);
  const auto rows = execute_plan(plan, jobs);
  write_out(out, sweep_csv(plan, rows));
  return kOk;
}

int cmd_report(const std::string& csv_path, const std::string& baseline, const std::string& out) {
  write_out(out, format_report(build_report(read_file(csv_path), baseline)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSHR-contention cache simulator"};
  app.require_subcommand(1);

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "generate Logit operator traces");
  gen->add_option("--model", g.model, "preset: llama3-70b | llama3-405b");
  gen->add_option("--seqlen", g.seqlen, "sequence length L")->required();
  gen->add_option("--heads", g.H, "head groups H (without --model)");
  gen->add_option("--group", g.G, "query heads per group G (without --model)");
  gen->add_option("--dim", g.D, "dimension per head D");
  gen->add_option("--elem-bytes", g.elem, "bytes per element");
  gen->add_option("--cores", g.cores, "number of cores");
  gen->add_option("--tb-lines", g.tb_lines, "output lines per thread block");
  gen->add_option("--line-size", g.line, "cache line size in bytes");
  gen->add_option("--mapping", g.mapping, "mapping file (default: built-in dataflow)");
  gen->add_option("--out", g.out, "output directory")->required();
  gen->add_option("--name", g.name, "workload name recorded in the manifest");

  RunArgs r;
  auto* runc = app.add_subcommand("run", "simulate one trace set");
  runc->add_option("--config", r.config, "key=value config file (default: built-in defaults)");
  runc->add_option("--traces", r.traces, "trace-set directory")->required();
  runc->add_option("--set", r.sets, "override, key=value (repeatable)");
  runc->add_option("--out", r.out, "stats JSON path (default: stdout)");
  runc->add_option("--csv", r.csv, "also write a one-row CSV");

  std::string plan_path, sweep_out;
  unsigned jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "run an experiment plan");
  sweep->add_option("--plan", plan_path, "plan JSON")->required();
  sweep->add_option("--out", sweep_out, "CSV path (default: stdout)");
  sweep->add_option("--jobs", jobs, "concurrent simulations (default: hardware threads)");

  std::string csv_path, baseline, report_out;
  auto* report = app.add_subcommand("report", "speedups against a baseline run");
  report->add_option("--csv", csv_path, "sweep CSV")->required();
  report->add_option("--baseline", baseline, "baseline run name")->required();
  report->add_option("--out", report_out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*gen) return cmd_gen(g);
    if (*runc) return cmd_run(r);
    if (*sweep) return cmd_sweep(plan_path, sweep_out, jobs);
    if (*report) return cmd_report(csv_path, baseline, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const MappingError& e) {
    std::cerr << "mapping error: " << e.what() << '\n';
    return kConfig;
  } catch (const TraceError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kTrace;
  } catch (const DeadlockError& e) {
    std::cerr << "deadlock: " << e.what() << '\n';
    return kDeadlock;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
