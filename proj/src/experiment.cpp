#include "mhasim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mhasim/engine.hpp"

namespace mhasim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

std::string value_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

void check_name(const std::string& what, const std::string& s) {
  if (s.empty() || s.find_first_of(",\n\"") != std::string::npos) {
    throw ConfigError(what + " '" + s + "' must be nonempty and free of commas, quotes and newlines");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string workload_name(const std::string& dir, const json& manifest) {
  if (manifest.contains("workload")) return manifest["workload"].get<std::string>();
  return fs::path(dir).lexically_normal().filename().string();
}

}  // namespace

ExperimentPlan parse_plan(const json& j, const std::string& base_dir) {
  ExperimentPlan plan;
  try {
    plan.baseline = j.at("baseline").get<std::string>();
    for (const auto& r : j.at("runs")) {
      PlanRun run;
      run.name = r.at("name").get<std::string>();
      run.config = resolve(base_dir, r.value("config", std::string{}));
      const auto& t = r.at("traces");
      if (t.is_string()) run.traces.push_back(resolve(base_dir, t.get<std::string>()));
      else
        for (const auto& x : t) run.traces.push_back(resolve(base_dir, x.get<std::string>()));
      if (r.contains("overrides")) {
        for (const auto& [k, v] : r["overrides"].items()) run.overrides[k] = value_string(v);
      }
      plan.runs.push_back(std::move(run));
    }
    if (j.contains("sweep")) {
      for (const auto& [k, vals] : j["sweep"].items()) {
        std::vector<std::string> vs;
        for (const auto& v : vals) vs.push_back(value_string(v));
        plan.sweep.emplace_back(k, std::move(vs));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment plan: ") + e.what());
  }
  return plan;
}

ExperimentPlan read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("plan '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_plan(j, fs::path(path).parent_path().string());
}

void validate_plan(const ExperimentPlan& plan) {
  std::set<std::string> names;
  for (const auto& r : plan.runs) {
    check_name("run name", r.name);
    if (!names.insert(r.name).second) throw ConfigError("duplicate run name '" + r.name + "'");
    if (r.traces.empty()) throw ConfigError("run '" + r.name + "' names no trace sets");
    SimConfig probe = SimConfig::defaults();
    for (const auto& [k, v] : r.overrides) probe.set(k, v);
  }
  if (!names.count(plan.baseline)) throw ConfigError("baseline '" + plan.baseline + "' is not among the runs");
  for (const auto& [k, vals] : plan.sweep) {
    check_name("sweep key", k);
    if (vals.empty()) throw ConfigError("sweep axis '" + k + "' has no values");
    SimConfig probe = SimConfig::defaults();
    for (const auto& v : vals) {
      check_name("sweep value", v);
      probe.set(k, v);
    }
  }
}

std::vector<SweepRow> execute_plan(const ExperimentPlan& plan, unsigned jobs) {
  validate_plan(plan);

  std::map<std::string, TraceSet> trace_sets;
  for (const auto& r : plan.runs) {
    for (const auto& t : r.traces) {
      if (!trace_sets.count(t)) trace_sets.emplace(t, read_trace_set(t));
    }
  }

  std::vector<std::vector<std::string>> points{{}};
  for (const auto& [k, vals] : plan.sweep) {
    std::vector<std::vector<std::string>> next;
    for (const auto& p : points) {
      for (const auto& v : vals) {
        next.push_back(p);
        next.back().push_back(v);
      }
    }
    points = std::move(next);
  }

  struct Job {
    const PlanRun* run;
    const std::string* traces;
    std::vector<std::string> point;
    SimConfig cfg;
  };
  std::vector<Job> work;
  for (const auto& r : plan.runs) {
    SimConfig base = r.config.empty() ? SimConfig::defaults() : read_config_file(r.config);
    for (const auto& [k, v] : r.overrides) base.set(k, v);
    for (const auto& t : r.traces) {
      for (const auto& p : points) {
        SimConfig cfg = base;
        for (std::size_t i = 0; i < p.size(); ++i) cfg.set(plan.sweep[i].first, p[i]);
        cfg.validate();
        work.push_back({&r, &t, p, cfg});
      }
    }
  }

  std::vector<SweepRow> rows(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const Job& j = work[i];
      const TraceSet& ts = trace_sets.at(*j.traces);
      rows[i] = {j.run->name, workload_name(*j.traces, ts.manifest), j.point, run(j.cfg, ts.cores)};
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, work.size())));
  std::vector<std::future<void>> futs;
  for (unsigned k = 0; k < jobs; ++k) futs.push_back(std::async(std::launch::async, worker));
  for (auto& f : futs) f.get();

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.workload, a.point, a.run) < std::tie(b.workload, b.point, b.run);
  });
  return rows;
}

std::string sweep_csv(const ExperimentPlan& plan, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "run,workload";
  for (const auto& [k, v] : plan.sweep) os << ',' << k;
  for (const auto& c : csv_metric_columns()) os << ',' << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r.run << ',' << r.workload;
    for (const auto& p : r.point) os << ',' << p;
    for (const auto& v : csv_metric_values(r.stats)) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

double geomean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0;
  for (double x : xs) s += std::log(x);
  return std::exp(s / static_cast<double>(xs.size()));
}

SpeedupReport build_report(const std::string& csv, const std::string& baseline) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty sweep CSV");
  const auto header = split(line, ',');
  const auto cyc = std::find(header.begin(), header.end(), "cycles");
  if (header.size() < 3 || header[0] != "run" || header[1] != "workload" || cyc == header.end()) {
    throw ConfigError("sweep CSV header must start with run,workload and contain cycles");
  }
  const auto cyc_idx = static_cast<std::size_t>(cyc - header.begin());

  SpeedupReport rep;
  rep.group_columns.assign(header.begin() + 1, cyc);
  std::map<std::vector<std::string>, std::map<std::string, double>> cycles;
  std::set<std::string> run_names;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw ConfigError("sweep CSV line " + std::to_string(lineno) + ": wrong field count");
    std::vector<std::string> key(f.begin() + 1, f.begin() + static_cast<std::ptrdiff_t>(cyc_idx));
    cycles[key][f[0]] = std::stod(f[cyc_idx]);
    run_names.insert(f[0]);
  }
  if (!run_names.count(baseline)) throw ConfigError("baseline '" + baseline + "' has no rows in the CSV");

  rep.runs.push_back(baseline);
  for (const auto& n : run_names) {
    if (n != baseline) rep.runs.push_back(n);
  }
  std::vector<std::vector<double>> per_run(rep.runs.size());
  for (const auto& [key, by_run] : cycles) {
    const auto base = by_run.find(baseline);
    if (base == by_run.end()) continue;
    rep.groups.push_back(key);
    std::vector<double> row;
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      const auto it = by_run.find(rep.runs[i]);
      const double sp = it == by_run.end() || it->second == 0 ? std::nan("") : base->second / it->second;
      row.push_back(sp);
      if (!std::isnan(sp)) per_run[i].push_back(sp);
    }
    rep.speedups.push_back(std::move(row));
  }
  for (const auto& v : per_run) rep.geomeans.push_back(geomean(v));
  return rep;
}

std::string format_report(const SpeedupReport& r) {
  std::ostringstream os;
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < r.group_columns.size(); ++i) os << (i ? "," : "") << r.group_columns[i];
  for (const auto& n : r.runs) os << ',' << n;
  os << '\n';
  for (std::size_t g = 0; g < r.groups.size(); ++g) {
    for (std::size_t i = 0; i < r.groups[g].size(); ++i) os << (i ? "," : "") << r.groups[g][i];
    for (double s : r.speedups[g]) os << ',' << num(s);
    os << '\n';
  }
  os << "geomean";
  for (std::size_t i = 1; i < r.group_columns.size(); ++i) os << ',';
  for (double s : r.geomeans) os << ',' << num(s);
  os << '\n';
  return os.str();
}

}  // namespace mhasim
