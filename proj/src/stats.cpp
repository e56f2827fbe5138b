#include "mhasim/stats.hpp"

#include <cstdio>
#include <numeric>

#include "mhasim/config.hpp"

namespace mhasim {

using nlohmann::json;

std::uint64_t StatsRecord::total(std::uint64_t SliceCounters::*field) const {
  std::uint64_t t = 0;
  for (const auto& s : slices) t += s.counters.*field;
  return t;
}

std::uint64_t StatsRecord::total(std::uint64_t CoreCounters::*field) const {
  std::uint64_t t = 0;
  for (const auto& c : cores) t += c.*field;
  return t;
}

namespace {
double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }
}  // namespace

DerivedMetrics derive(const StatsRecord& s) {
  DerivedMetrics d;
  const double cycles = static_cast<double>(s.cycles);
  const double nslices = static_cast<double>(s.slices.size());
  const auto hits = s.total(&SliceCounters::hits);
  const auto misses = s.total(&SliceCounters::misses);
  d.l2_hit_rate = ratio(static_cast<double>(hits), static_cast<double>(hits + misses));
  d.mshr_hit_rate = ratio(static_cast<double>(s.total(&SliceCounters::mshr_merges)), static_cast<double>(misses));
  d.mshr_utilization = ratio(static_cast<double>(s.total(&SliceCounters::occupancy_integral)),
                             cycles * s.mshr_num_entry * nslices);
  const double seconds = ratio(cycles, s.frequency_hz);
  d.dram_bandwidth = ratio(static_cast<double>((s.dram.reads + s.dram.writes) * s.line_size), seconds);
  const auto l1_hits = s.total(&CoreCounters::l1_read_hits);
  d.l1_hit_rate =
      ratio(static_cast<double>(l1_hits), static_cast<double>(l1_hits + s.total(&CoreCounters::l1_read_misses)));
  d.stall_fraction = ratio(static_cast<double>(s.total(&SliceCounters::stall_cycles)), cycles * nslices);
  return d;
}

void finalize(StatsRecord& s) { s.derived = derive(s); }

namespace {

json slice_json(const SliceStats& s) {
  const auto& c = s.counters;
  return {{"lookups", c.lookups},
          {"hits", c.hits},
          {"misses", c.misses},
          {"mshr_merges", c.mshr_merges},
          {"mshr_allocs", c.mshr_allocs},
          {"stall_cycles", c.stall_cycles},
          {"target_stall_cycles", c.target_stall_cycles},
          {"mshr_occupancy_integral", c.occupancy_integral},
          {"fills", c.fills},
          {"writebacks", c.writebacks},
          {"dram_reads", c.dram_reads},
          {"inferred_hits_issued", s.inferred_hits_issued},
          {"inferred_mshr_issued", s.inferred_mshr_issued}};
}

SliceStats slice_from_json(const json& j) {
  SliceStats s;
  auto& c = s.counters;
  c.lookups = j.at("lookups");
  c.hits = j.at("hits");
  c.misses = j.at("misses");
  c.mshr_merges = j.at("mshr_merges");
  c.mshr_allocs = j.at("mshr_allocs");
  c.stall_cycles = j.at("stall_cycles");
  c.target_stall_cycles = j.at("target_stall_cycles");
  c.occupancy_integral = j.at("mshr_occupancy_integral");
  c.fills = j.at("fills");
  c.writebacks = j.at("writebacks");
  c.dram_reads = j.at("dram_reads");
  s.inferred_hits_issued = j.at("inferred_hits_issued");
  s.inferred_mshr_issued = j.at("inferred_mshr_issued");
  return s;
}

json core_json(const CoreCounters& c) {
  return {{"ops_issued", c.ops_issued},
          {"bubbles", c.bubbles},
          {"l1_read_hits", c.l1_read_hits},
          {"l1_read_misses", c.l1_read_misses},
          {"l1_merges", c.l1_merges},
          {"writes", c.writes},
          {"requests_issued", c.requests_issued},
          {"responses", c.responses},
          {"blocks_executed", c.blocks_executed},
          {"steals_in", c.steals_in},
          {"steals_out", c.steals_out},
          {"c_mem", c.c_mem_total},
          {"c_idle", c.c_idle_total},
          {"last_block_done", c.last_block_done}};
}

CoreCounters core_from_json(const json& j) {
  CoreCounters c;
  c.ops_issued = j.at("ops_issued");
  c.bubbles = j.at("bubbles");
  c.l1_read_hits = j.at("l1_read_hits");
  c.l1_read_misses = j.at("l1_read_misses");
  c.l1_merges = j.at("l1_merges");
  c.writes = j.at("writes");
  c.requests_issued = j.at("requests_issued");
  c.responses = j.at("responses");
  c.blocks_executed = j.at("blocks_executed");
  c.steals_in = j.at("steals_in");
  c.steals_out = j.at("steals_out");
  c.c_mem_total = j.at("c_mem");
  c.c_idle_total = j.at("c_idle");
  c.last_block_done = j.at("last_block_done");
  return c;
}

}  // namespace

json to_json(const StatsRecord& s) {
  json raw;
  raw["cycles"] = s.cycles;
  raw["frequency_hz"] = s.frequency_hz;
  raw["line_size"] = s.line_size;
  raw["mshr_num_entry"] = s.mshr_num_entry;
  raw["slices"] = json::array();
  for (const auto& sl : s.slices) raw["slices"].push_back(slice_json(sl));
  raw["cores"] = json::array();
  for (const auto& c : s.cores) raw["cores"].push_back(core_json(c));
  raw["progress"] = s.progress;
  raw["dram"] = {{"reads", s.dram.reads},
                 {"writes", s.dram.writes},
                 {"row_hits", s.dram.row_hits},
                 {"row_misses", s.dram.row_misses},
                 {"busy_cycles", s.dram.busy_cycles},
                 {"latency_sum", s.dram.latency_sum}};
  raw["tcs_series"] = s.tcs_series;
  raw["gear_trace"] = s.gear_trace;

  const auto& d = s.derived;
  json derived = {{"l2_hit_rate", d.l2_hit_rate},
                  {"mshr_hit_rate", d.mshr_hit_rate},
                  {"mshr_utilization", d.mshr_utilization},
                  {"dram_bandwidth_bytes_per_s", d.dram_bandwidth},
                  {"l1_hit_rate", d.l1_hit_rate},
                  {"stall_fraction", d.stall_fraction}};
  return {{"schema_version", kStatsSchemaVersion}, {"config", s.config}, {"raw", raw}, {"derived", derived}};
}

StatsRecord stats_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kStatsSchemaVersion) {
    throw std::runtime_error("unsupported stats schema version " + j.at("schema_version").dump());
  }
  StatsRecord s;
  s.config = j.at("config").get<std::map<std::string, std::string>>();
  const json& raw = j.at("raw");
  s.cycles = raw.at("cycles");
  s.frequency_hz = raw.at("frequency_hz");
  s.line_size = raw.at("line_size");
  s.mshr_num_entry = raw.at("mshr_num_entry");
  for (const auto& sl : raw.at("slices")) s.slices.push_back(slice_from_json(sl));
  for (const auto& c : raw.at("cores")) s.cores.push_back(core_from_json(c));
  s.progress = raw.at("progress").get<std::vector<std::uint64_t>>();
  const json& dr = raw.at("dram");
  s.dram.reads = dr.at("reads");
  s.dram.writes = dr.at("writes");
  s.dram.row_hits = dr.at("row_hits");
  s.dram.row_misses = dr.at("row_misses");
  s.dram.busy_cycles = dr.at("busy_cycles");
  s.dram.latency_sum = dr.at("latency_sum");
  s.tcs_series = raw.at("tcs_series").get<std::vector<double>>();
  s.gear_trace = raw.at("gear_trace").get<std::vector<std::uint32_t>>();
  finalize(s);
  return s;
}

std::string dump_json(const StatsRecord& s) { return to_json(s).dump(2) + "\n"; }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> csv_metric_columns() {
  return {"cycles",      "l2_hit_rate", "mshr_hit_rate", "mshr_utilization", "dram_bandwidth_gbps",
          "l1_hit_rate", "stall_fraction", "dram_reads", "dram_writes",     "max_gear"};
}

std::vector<std::string> csv_metric_values(const StatsRecord& s) {
  const auto& d = s.derived;
  std::uint32_t max_gear = 0;
  for (auto g : s.gear_trace) max_gear = std::max(max_gear, g);
  return {std::to_string(s.cycles),         format_double(d.l2_hit_rate),      format_double(d.mshr_hit_rate),
          format_double(d.mshr_utilization), format_double(d.dram_bandwidth / 1e9), format_double(d.l1_hit_rate),
          format_double(d.stall_fraction),  std::to_string(s.dram.reads),      std::to_string(s.dram.writes),
          std::to_string(max_gear)};
}

}  // namespace mhasim
