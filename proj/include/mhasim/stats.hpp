#pragma once

// Raw run counters, the metrics derived from them, and their JSON / CSV
// encodings.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhasim/cache.hpp"
#include "mhasim/core.hpp"
#include "mhasim/dram.hpp"

namespace mhasim {

inline constexpr int kStatsSchemaVersion = 1;

struct SliceStats {
  SliceCounters counters;
  std::uint64_t inferred_hits_issued = 0;
  std::uint64_t inferred_mshr_issued = 0;
};

struct DerivedMetrics {
  double l2_hit_rate = 0;
  double mshr_hit_rate = 0;     // merges / misses
  double mshr_utilization = 0;  // occupancy integral / (cycles * entries * slices)
  double dram_bandwidth = 0;    // bytes per second
  double l1_hit_rate = 0;
  double stall_fraction = 0;    // stalled slice-cycles / (cycles * slices)
  bool operator==(const DerivedMetrics&) const = default;
};

struct StatsRecord {
  std::map<std::string, std::string> config;
  Cycle cycles = 0;
  double frequency_hz = 0;
  std::uint32_t line_size = 64;
  std::uint32_t mshr_num_entry = 0;
  std::vector<SliceStats> slices;
  std::vector<CoreCounters> cores;
  std::vector<std::uint64_t> progress;  // requests served per core, summed over slices
  DramCounters dram;
  std::vector<double> tcs_series;
  std::vector<std::uint32_t> gear_trace;
  DerivedMetrics derived;

  std::uint64_t total(std::uint64_t SliceCounters::*field) const;
  std::uint64_t total(std::uint64_t CoreCounters::*field) const;
};

DerivedMetrics derive(const StatsRecord& s);
/// Fills `derived` from the raw counters.
void finalize(StatsRecord& s);

nlohmann::json to_json(const StatsRecord& s);
/// Reads the raw part of a stats document and recomputes the metrics.
StatsRecord stats_from_json(const nlohmann::json& j);
std::string dump_json(const StatsRecord& s);

/// CSV columns after the caller-supplied key columns.
std::vector<std::string> csv_metric_columns();
std::vector<std::string> csv_metric_values(const StatsRecord& s);
std::string format_double(double v);

}  // namespace mhasim
