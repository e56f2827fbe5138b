#pragma once

// Experiment plans: named runs over trace sets, optional parameter sweeps,
// concurrent execution, CSV aggregation and speedup reports.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mhasim/config.hpp"
#include "mhasim/stats.hpp"

namespace mhasim {

struct PlanRun {
  std::string name;
  std::string config;               // path; empty means built-in defaults
  std::vector<std::string> traces;  // trace-set directories
  std::map<std::string, std::string> overrides;
};

struct ExperimentPlan {
  std::string baseline;
  std::vector<PlanRun> runs;
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;  // key -> values
};

/// Relative paths in the plan resolve against `base_dir`.
ExperimentPlan parse_plan(const nlohmann::json& j, const std::string& base_dir = ".");
ExperimentPlan read_plan_file(const std::string& path);
/// Throws ConfigError on a missing baseline, duplicate names or bad keys.
void validate_plan(const ExperimentPlan& plan);

struct SweepRow {
  std::string run;
  std::string workload;
  std::vector<std::string> point;  // one value per sweep axis
  StatsRecord stats;
};

/// Runs every (run, trace set, sweep point) combination on up to `jobs`
/// threads. Rows come back sorted by (workload, point, run).
std::vector<SweepRow> execute_plan(const ExperimentPlan& plan, unsigned jobs = 0);
std::string sweep_csv(const ExperimentPlan& plan, const std::vector<SweepRow>& rows);

double geomean(std::span<const double> xs);

struct SpeedupReport {
  std::vector<std::string> runs;
  std::vector<std::string> group_columns;  // workload + sweep axes
  std::vector<std::vector<std::string>> groups;
  std::vector<std::vector<double>> speedups;  // [group][run]
  std::vector<double> geomeans;               // [run]
};

/// Speedup = baseline cycles / run cycles within each (workload, point)
/// group of a sweep CSV.
SpeedupReport build_report(const std::string& csv, const std::string& baseline);
std::string format_report(const SpeedupReport& r);

}  // namespace mhasim
