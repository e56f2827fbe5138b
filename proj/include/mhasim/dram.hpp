#pragma once

// Reduced DRAM timing model: banked channels with open-page row buffers and
// command-level FR-FCFS (PRE / ACT / RD, one command per channel per cycle),
// plus a fixed-latency "simple" mode.

#include <cstdint>
#include <deque>
#include <vector>

#include "mhasim/cache.hpp"
#include "mhasim/config.hpp"
#include "mhasim/types.hpp"

namespace mhasim {

struct DramAddress {
  std::uint32_t channel = 0;
  std::uint32_t rank = 0;
  std::uint32_t bank = 0;
  std::uint64_t row = 0;
  std::uint32_t column = 0;
  bool operator==(const DramAddress&) const = default;
};

/// Line-interleaved: channel bits sit just above the line offset, followed
/// by column, bank, rank and row bits.
DramAddress address_map(Addr line, const DramConfig& cfg, std::uint32_t line_size);

struct DramCompletion {
  Addr line = 0;
  bool is_write = false;
  std::uint32_t slice = 0;
};

struct DramCounters {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t row_misses = 0;
  std::uint64_t busy_cycles = 0;  // data-bus cycles summed over channels
  std::uint64_t latency_sum = 0;  // enqueue to completion, over completed requests
};

/// Recorded at a request's column command when tracing is enabled. The
/// `first_*` fields describe the request's first command (ACT, PRE or RD).
struct DramScheduleEvent {
  Cycle cycle = 0;  // column command
  std::uint32_t channel = 0;
  std::uint64_t seq = 0;
  bool row_hit = false;            // needed no PRE/ACT
  bool first_hit_ready = false;    // another column command was issuable then
  bool first_older_ready = false;  // an older request could take a command then
  Cycle data_start = 0;
  Cycle done = 0;
};

class DramController {
 public:
  DramController(const DramConfig& cfg, std::uint32_t line_size);

  void enqueue(Cycle now, const DramRequest& req);
  /// Issues at most one command per channel and returns completed transfers.
  void tick(Cycle now, std::vector<DramCompletion>& done);
  bool idle() const;

  const DramCounters& counters() const { return counters_; }
  void enable_trace(bool on) { trace_on_ = on; }
  const std::vector<DramScheduleEvent>& trace() const { return trace_; }

 private:
  struct Pending {
    DramRequest req;
    DramAddress da;
    Cycle arrival = 0;
    std::uint64_t seq = 0;
    bool started = false;
    bool row_hit = true;
    bool first_hit_ready = false;
    bool first_older_ready = false;
  };
  struct InFlight {
    Cycle done = 0;
    std::uint64_t seq = 0;
    DramCompletion c;
    Cycle arrival = 0;
  };
  struct Bank {
    bool open = false;
    std::uint64_t row = 0;
    Cycle act_ready = 0;  // earliest ACT
    Cycle rd_ready = 0;   // earliest column command
    Cycle pre_ready = 0;  // earliest PRE
  };
  struct Channel {
    std::deque<Pending> queue;
    std::deque<Pending> overflow;
    std::vector<Bank> banks;
    Cycle next_rd = 0;  // data-bus spacing between column commands
    std::vector<InFlight> in_flight;
  };

  void schedule_frfcfs(Cycle now, std::uint32_t ch_id, Channel& ch);
  void schedule_simple(Cycle now, Channel& ch);

  DramConfig cfg_;
  std::uint32_t line_size_;
  std::vector<Channel> channels_;
  std::uint64_t next_seq_ = 0;
  DramCounters counters_;
  bool trace_on_ = false;
  std::vector<DramScheduleEvent> trace_;
};

}  // namespace mhasim
