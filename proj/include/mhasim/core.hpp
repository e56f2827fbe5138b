#pragma once

// Trace-fed vector core: instruction windows each running one thread block,
// a private L1, work stealing and the in-core max_tb controller.

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mhasim/cache.hpp"
#include "mhasim/config.hpp"
#include "mhasim/types.hpp"
#include "mhasim/workload.hpp"

namespace mhasim {

/// One finished memory op, whether it hit in L1 or came back from L2.
struct Completion {
  std::uint64_t tb_id = 0;
  std::uint32_t op_index = 0;
  Addr line = 0;
  bool is_write = false;
  auto operator<=>(const Completion&) const = default;
};

/// One issued op (any kind), for order checks in tests.
struct IssueRecord {
  Cycle cycle = 0;
  CoreId core = 0;
  std::uint32_t window = 0;
  std::uint64_t tb_id = 0;
  std::uint32_t op_index = 0;
};

struct CoreCounters {
  std::uint64_t ops_issued = 0;
  std::uint64_t bubbles = 0;
  std::uint64_t l1_read_hits = 0;
  std::uint64_t l1_read_misses = 0;
  std::uint64_t l1_merges = 0;  // read misses folded into an outstanding L1 miss
  std::uint64_t writes = 0;
  std::uint64_t requests_issued = 0;  // sent to L2
  std::uint64_t responses = 0;
  std::uint64_t blocks_executed = 0;
  std::uint64_t steals_in = 0;
  std::uint64_t steals_out = 0;
  std::uint64_t c_mem_total = 0;
  std::uint64_t c_idle_total = 0;
  Cycle last_block_done = 0;
};

enum class WindowState : std::uint8_t { Idle, Running, Full, Blocked };

struct InstructionWindow {
  std::optional<ThreadBlock> tb;
  std::size_t cursor = 0;
  std::uint32_t outstanding = 0;
  std::uint32_t bubble_left = 0;  // remaining cycles of a partly issued C op
};

/// New max_tb after one sub-period of the in-core controller.
std::uint32_t incore_step(std::uint32_t max_tb, std::uint64_t c_mem, std::uint64_t c_idle, const ThrottleConfig& cfg,
                          std::uint32_t num_windows);

class Core {
 public:
  Core(CoreId id, const SimConfig& cfg);

  void enqueue_block(ThreadBlock tb) { pending_.push_back(std::move(tb)); }
  /// Fills empty windows while fewer than max_tb are active. Never preempts.
  void assign_thread_blocks();
  /// Issues at most one op. L2-bound requests are appended to `out`.
  void tick(Cycle now, std::uint64_t& next_request_id, std::vector<MemRequest>& out);
  void on_response(Cycle now, const MemResponse& r);

  /// Sub-period boundary: throttled cores adjust max_tb; counters reset.
  void end_sub_period(const ThrottleConfig& cfg);
  void set_throttled(bool on, bool reset_on_unthrottle);

  /// No block in any window and nothing pending.
  bool out_of_work() const { return active_windows() == 0 && pending_.empty(); }
  bool idle() const { return out_of_work(); }
  std::size_t pending_count() const { return pending_.size(); }
  std::optional<ThreadBlock> steal_tail();
  void receive_stolen(ThreadBlock tb);

  CoreId id() const { return id_; }
  std::uint32_t max_tb() const { return max_tb_; }
  void set_max_tb(std::uint32_t v);
  bool throttled() const { return throttled_; }
  std::uint64_t c_mem() const { return c_mem_; }
  std::uint64_t c_idle() const { return c_idle_; }
  std::uint32_t active_windows() const;
  WindowState window_state(std::size_t w) const;
  const std::vector<InstructionWindow>& windows() const { return windows_; }
  const CoreCounters& counters() const { return counters_; }
  const L1Cache& l1() const { return l1_; }

  void set_completion_log(std::vector<Completion>* log) { completions_ = log; }
  void set_issue_log(std::vector<IssueRecord>* log) { issues_ = log; }

 private:
  bool can_issue(const InstructionWindow& w) const;
  void try_retire(Cycle now, std::size_t w);

  CoreId id_;
  std::uint32_t depth_;
  std::vector<InstructionWindow> windows_;
  std::deque<ThreadBlock> pending_;
  std::size_t current_ = 0;
  std::uint32_t max_tb_;
  bool throttled_ = false;
  std::uint64_t c_mem_ = 0;
  std::uint64_t c_idle_ = 0;
  L1Cache l1_;
  CoreCounters counters_;
  struct L1Waiter {
    std::uint32_t window = 0;
    std::uint64_t tb_id = 0;
    std::uint32_t op_index = 0;
  };
  // Outstanding L1 read misses; later reads of the same line wait here.
  std::unordered_map<Addr, std::vector<L1Waiter>> l1_mshr_;
  std::vector<Completion>* completions_ = nullptr;
  std::vector<IssueRecord>* issues_ = nullptr;
};

/// Every core with no work takes the tail block of the core holding the most
/// pending blocks (ties to the lower id). Returns the number of migrations.
std::size_t steal_thread_blocks(std::vector<Core>& cores);

}  // namespace mhasim
