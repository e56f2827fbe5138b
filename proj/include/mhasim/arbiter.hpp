#pragma once

// Per-slice request selection: FCFS, balanced (B), MSHR-aware (MA) and
// balanced MSHR-aware (BMA).

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "mhasim/config.hpp"
#include "mhasim/types.hpp"

namespace mhasim {

/// Bounded FIFO of recently confirmed cache-hit lines. Duplicates are kept;
/// entries are never invalidated, so a stale address is only a wrong guess.
class HitBuffer {
 public:
  explicit HitBuffer(std::size_t capacity = 16) : capacity_(capacity) {}
  void push(Addr line);
  bool contains(Addr line) const;
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Addr>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Addr> items_;
};

struct SentReq {
  Addr line = 0;
  bool spec_hit = false;
  Cycle issued = 0;
};

/// Requests sent to lookup but not yet visible in the MSHR. Each element is
/// dropped exactly `residency` cycles after issue (hit + mshr latency).
class SentReqs {
 public:
  explicit SentReqs(std::uint32_t residency = 8) : residency_(residency) {}
  void push(const SentReq& r) { items_.push_back(r); }
  void age(Cycle now);
  const std::deque<SentReq>& items() const { return items_; }
  std::uint32_t residency() const { return residency_; }

 private:
  std::uint32_t residency_;
  std::deque<SentReq> items_;
};

struct MshrSnapshotEntry {
  Addr line = 0;
  std::uint32_t targets = 0;
};

enum class ReqClass : std::uint8_t { Other = 0, InferredMshrResident = 1, InferredHit = 2 };

struct MergedView {
  std::vector<Addr> hits;           // inferred cache hits
  std::vector<Addr> mshr_resident;  // inferred MSHR-resident, deduplicated
  std::size_t estimated_entries = 0;

  ReqClass classify(Addr line) const;
};

MergedView build_merged_view(const HitBuffer& hits, std::span<const MshrSnapshotEntry> snapshot,
                             const SentReqs& sent);

/// Requests served per core on this slice since operator start.
struct ProgressCounters {
  std::vector<std::uint64_t> served;
  explicit ProgressCounters(std::size_t cores = 0) : served(cores, 0) {}
};

/// Index into `queue` of the request the policy picks. `queue` is in arrival
/// order and must be nonempty.
std::size_t select_request(ArbiterPolicy policy, std::span<const MemRequest> queue, const MergedView& view,
                           const ProgressCounters& counters);

class Arbiter {
 public:
  Arbiter(const ArbiterConfig& cfg, std::uint32_t num_cores, std::uint32_t hit_latency, std::uint32_t mshr_latency);

  /// Picks one request, records it in sent_reqs and bumps its core's counter.
  std::size_t select(std::span<const MemRequest> queue, std::span<const MshrSnapshotEntry> snapshot, Cycle now);
  void on_hit_observed(Addr line) { hit_buffer_.push(line); }
  void age(Cycle now) { sent_.age(now); }

  const ProgressCounters& counters() const { return counters_; }
  const HitBuffer& hit_buffer() const { return hit_buffer_; }
  const SentReqs& sent_reqs() const { return sent_; }
  ArbiterPolicy policy() const { return policy_; }

  std::uint64_t inferred_hits_issued = 0;
  std::uint64_t inferred_mshr_issued = 0;

 private:
  ArbiterPolicy policy_;
  HitBuffer hit_buffer_;
  SentReqs sent_;
  ProgressCounters counters_;
};

}  // namespace mhasim
