#pragma once

// Global clock and fixed per-cycle ordering:
// throttle -> cores (+ stealing) -> request wires -> slices -> DRAM -> response wires.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhasim/cache.hpp"
#include "mhasim/config.hpp"
#include "mhasim/core.hpp"
#include "mhasim/dram.hpp"
#include "mhasim/stats.hpp"
#include "mhasim/throttle.hpp"
#include "mhasim/wire.hpp"
#include "mhasim/workload.hpp"

namespace mhasim {

/// Set-interleaved slice owning `line`.
std::uint32_t slice_for(Addr line, const SimConfig& cfg);

class Simulator {
 public:
  /// `traces[i]` is core i's block list; missing cores get no work. More
  /// traces than cores is a TraceError.
  Simulator(const SimConfig& cfg, std::vector<CoreTrace> traces);

  /// Advances one cycle. Returns false once everything has drained.
  bool step();
  /// Runs to completion and returns finalized statistics. Throws
  /// DeadlockError if nothing moves for `deadlock_threshold` cycles.
  StatsRecord run();

  bool drained() const;
  Cycle now() const { return now_; }
  Cycle total_cycles() const { return total_cycles_; }
  StatsRecord stats() const;
  std::string state_dump() const;

  const SimConfig& config() const { return cfg_; }
  const std::vector<Core>& cores() const { return cores_; }
  const std::vector<L2Slice>& slices() const { return slices_; }
  DramController& dram() { return dram_; }
  const DramController& dram() const { return dram_; }
  const GlobalThrottle& throttle() const { return throttle_; }

  /// Records every finished memory op (L1 hit or L2 response).
  void record_completions(std::vector<Completion>* log);
  void record_issues(std::vector<IssueRecord>* log);
  /// Records every L2 tag check.
  void record_lookups(std::vector<LookupRecord>* log);
  /// Called after every simulated cycle.
  void set_observer(std::function<void(Cycle, const Simulator&)> fn) { observer_ = std::move(fn); }

 private:
  void throttle_phase();
  std::uint64_t activity() const;

  SimConfig cfg_;
  std::vector<Core> cores_;
  std::vector<L2Slice> slices_;
  DramController dram_;
  GlobalThrottle throttle_;
  std::vector<Wire<MemRequest>> req_wires_;    // per slice
  std::vector<Wire<MemResponse>> resp_wires_;  // per core
  std::vector<std::uint64_t> stalls_at_sample_;
  Cycle now_ = 0;
  Cycle total_cycles_ = 0;
  bool done_ = false;
  std::uint64_t next_request_id_ = 0;
  std::uint64_t wire_moves_ = 0;
  std::uint64_t last_activity_ = 0;
  Cycle quiet_cycles_ = 0;
  std::vector<MemRequest> issued_buf_;
  SliceOutputs slice_out_;
  std::vector<DramCompletion> dram_done_;
  std::function<void(Cycle, const Simulator&)> observer_;
};

StatsRecord run(const SimConfig& cfg, std::vector<CoreTrace> traces);

/// A directory of core_<i>.trace files plus manifest.json.
struct TraceSet {
  std::vector<CoreTrace> cores;
  nlohmann::json manifest;
};

void write_trace_set(const std::string& dir, const std::vector<CoreTrace>& cores, nlohmann::json manifest);
TraceSet read_trace_set(const std::string& dir);

}  // namespace mhasim
