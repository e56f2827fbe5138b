#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "mhasim/arbiter.hpp"
#include "mhasim/config.hpp"
#include "mhasim/types.hpp"

namespace mhasim {

/// Tag/state array of a set-associative LRU cache. Callers supply the set
/// index so the same array serves both the private L1 and an L2 slice.
class SetAssocArray {
 public:
  SetAssocArray(std::uint64_t num_sets, std::uint32_t ways);

  struct Victim {
    Addr line = 0;
    bool dirty = false;
  };

  /// Lookup with LRU update on hit.
  bool access(std::uint64_t set, Addr line);
  bool contains(std::uint64_t set, Addr line) const;
  /// Marks a resident line dirty; returns false if not resident.
  bool mark_dirty(std::uint64_t set, Addr line);
  /// Installs (or refreshes) a line as MRU. Returns the evicted line, if any.
  std::optional<Victim> fill(std::uint64_t set, Addr line, bool dirty);

  std::uint64_t num_sets() const { return num_sets_; }
  std::uint32_t ways() const { return ways_; }

 private:
  struct Way {
    Addr line = 0;
    std::uint64_t stamp = 0;
    bool valid = false;
    bool dirty = false;
  };
  Way* find(std::uint64_t set, Addr line);
  const Way* find(std::uint64_t set, Addr line) const;

  std::uint64_t num_sets_;
  std::uint32_t ways_;
  std::uint64_t clock_ = 0;
  std::vector<Way> ways_storage_;
};

/// Private L1: write-through, write-no-allocate, allocate-on-fill.
class L1Cache {
 public:
  L1Cache(const CacheConfig& cfg);
  bool read(Addr line) { return array_.access(set_of(line), line); }
  /// Write-through: touches a resident copy, never allocates.
  bool write(Addr line) { return array_.access(set_of(line), line); }
  void fill(Addr line) { array_.fill(set_of(line), line, false); }
  bool contains(Addr line) const { return array_.contains(set_of(line), line); }

 private:
  std::uint64_t set_of(Addr line) const { return (line / line_size_) % array_.num_sets(); }
  std::uint32_t line_size_;
  SetAssocArray array_;
};

using MshrTarget = MemResponse;  // everything needed to answer the requester

/// One outstanding distinct miss, waiting on DRAM. Freed the cycle DRAM
/// returns the line; the fill then travels through the response queue.
struct MshrEntry {
  Addr line = 0;
  std::vector<MshrTarget> targets;
  bool dirty = false;  // a write target merged in
};

class Mshr {
 public:
  Mshr(std::uint32_t num_entry, std::uint32_t num_target) : num_entry_(num_entry), num_target_(num_target) {}
  MshrEntry* find(Addr line);
  const MshrEntry* find(Addr line) const;
  bool full() const { return entries_.size() >= num_entry_; }
  MshrEntry& allocate(Addr line);
  MshrEntry release(Addr line);
  std::size_t size() const { return entries_.size(); }
  std::uint32_t num_entry() const { return num_entry_; }
  std::uint32_t num_target() const { return num_target_; }
  const std::vector<MshrEntry>& entries() const { return entries_; }
  void snapshot(std::vector<MshrSnapshotEntry>& out) const;

 private:
  std::uint32_t num_entry_;
  std::uint32_t num_target_;
  std::vector<MshrEntry> entries_;
};

struct DramRequest {
  Addr line = 0;
  bool is_write = false;
  std::uint32_t slice = 0;
};

struct SliceCounters {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t mshr_merges = 0;
  std::uint64_t mshr_allocs = 0;
  std::uint64_t stall_cycles = 0;
  std::uint64_t target_stall_cycles = 0;  // subset caused by a full target list
  std::uint64_t occupancy_integral = 0;
  std::uint64_t fills = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t dram_reads = 0;
};

/// Tag-check outcome of one L2 request.
struct LookupRecord {
  Cycle cycle = 0;
  std::uint64_t request_id = 0;
  std::uint64_t tb_id = 0;
  std::uint32_t op_index = 0;
  Addr line = 0;
  bool is_write = false;
  bool hit = false;
};

/// Per-cycle products of a slice, drained by the engine.
struct SliceOutputs {
  std::vector<MemResponse> responses;
  std::vector<DramRequest> dram;
};

/// One L2 slice: request queue + arbiter, a lookup pipeline of depth
/// hit_latency + mshr_latency, the MSHR file and the response (fill) queue.
///
/// A request admitted at cycle t has its tag result at t + hit_latency and,
/// on a miss, probes the MSHR at t + hit_latency + mshr_latency. A failed
/// MSHR reservation freezes the whole pipeline and blocks admission until
/// the probe succeeds.
class L2Slice {
 public:
  L2Slice(const SimConfig& cfg, std::uint32_t slice_id);

  bool can_accept() const { return req_q_.size() < req_q_cap_; }
  void accept(const MemRequest& r);

  void tick(Cycle now, SliceOutputs& out);
  /// DRAM returned `line`: forward to every target now, queue the fill and
  /// free the entry. Throws std::logic_error if no entry is waiting.
  void dram_response(Cycle now, Addr line, SliceOutputs& out);

  bool idle() const;
  bool stalled() const { return stalled_; }
  std::uint32_t id() const { return id_; }
  std::uint64_t local_set(Addr line) const { return (line / line_size_ / num_slices_) % array_.num_sets(); }

  const Mshr& mshr() const { return mshr_; }
  const Arbiter& arbiter() const { return arbiter_; }
  const SliceCounters& counters() const { return counters_; }
  const std::vector<MemRequest>& request_queue() const { return req_q_; }
  std::size_t response_queue_size() const { return resp_q_.size(); }
  bool resident(Addr line) const { return array_.contains(local_set(line), line); }
  void set_lookup_log(std::vector<LookupRecord>* log) { lookups_ = log; }

 private:
  struct Fill {
    Addr line = 0;
    bool dirty = false;
  };
  struct Slot {
    MemRequest req;
    bool tag_checked = false;
  };

  void tag_check(Cycle now, Slot& s, bool& remove);
  bool mshr_probe(const MemRequest& r, SliceOutputs& out);
  void process_fill(SliceOutputs& out);
  void admit(Cycle now);
  bool can_admit() const;

  std::uint32_t id_;
  std::uint32_t line_size_;
  std::uint32_t num_slices_;
  std::uint32_t hit_latency_;
  std::uint32_t data_latency_;
  std::uint32_t depth_;
  std::size_t req_q_cap_;
  std::size_t resp_q_cap_;
  RespArbitration rr_policy_;
  bool rr_turn_request_ = true;

  SetAssocArray array_;
  Mshr mshr_;
  Arbiter arbiter_;
  std::vector<MemRequest> req_q_;
  std::vector<std::optional<Slot>> slots_;  // index = cycles since admission
  std::deque<Fill> resp_q_;
  std::deque<Fill> fill_overflow_;
  std::deque<std::pair<Cycle, MemResponse>> hit_returns_;
  std::vector<MshrSnapshotEntry> snapshot_buf_;
  bool stalled_ = false;
  SliceCounters counters_;
  std::vector<LookupRecord>* lookups_ = nullptr;
};

}  // namespace mhasim
