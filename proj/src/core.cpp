#include "mhasim/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace mhasim {

std::uint32_t incore_step(std::uint32_t max_tb, std::uint64_t c_mem, std::uint64_t c_idle, const ThrottleConfig& cfg,
                          std::uint32_t num_windows) {
  if (c_mem > cfg.cmem_upper) max_tb = std::max<std::uint32_t>(1, max_tb - 1);
  else if (c_mem < cfg.cmem_lower) max_tb = std::min(num_windows, max_tb + 1);
  if (c_idle > cfg.cidle_upper) max_tb = std::min(num_windows, max_tb + 1);
  return max_tb;
}

Core::Core(CoreId id, const SimConfig& cfg)
    : id_(id),
      depth_(cfg.core.inst_window_depth),
      windows_(cfg.core.num_inst_windows),
      max_tb_(cfg.core.num_inst_windows),
      l1_(cfg.l1) {}

std::uint32_t Core::active_windows() const {
  return static_cast<std::uint32_t>(
      std::count_if(windows_.begin(), windows_.end(), [](const InstructionWindow& w) { return w.tb.has_value(); }));
}

WindowState Core::window_state(std::size_t i) const {
  const auto& w = windows_.at(i);
  if (!w.tb) return WindowState::Idle;
  if (w.cursor >= w.tb->ops.size()) return WindowState::Blocked;
  if (w.outstanding >= depth_) return WindowState::Full;
  return WindowState::Running;
}

void Core::set_max_tb(std::uint32_t v) {
  if (v < 1 || v > windows_.size()) throw std::out_of_range("max_tb outside [1, windows]");
  max_tb_ = v;
}

void Core::assign_thread_blocks() {
  std::uint32_t active = active_windows();
  for (auto& w : windows_) {
    if (active >= max_tb_ || pending_.empty()) break;
    if (w.tb) continue;
    w.tb = std::move(pending_.front());
    pending_.pop_front();
    w.cursor = 0;
    w.outstanding = 0;
    w.bubble_left = 0;
    ++active;
  }
}

bool Core::can_issue(const InstructionWindow& w) const {
  return w.tb && w.cursor < w.tb->ops.size() && w.outstanding < depth_;
}

void Core::tick(Cycle now, std::uint64_t& next_request_id, std::vector<MemRequest>& out) {
  if (active_windows() == 0) {
    if (pending_.empty()) {
      ++c_idle_;
      ++counters_.c_idle_total;
    }
    return;
  }

  const std::size_t n = windows_.size();
  std::size_t pick = n;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (current_ + k) % n;
    if (can_issue(windows_[i])) {
      pick = i;
      break;
    }
  }
  if (pick == n) {
    // Every active window is full or draining: all wait on memory.
    ++c_mem_;
    ++counters_.c_mem_total;
    return;
  }
  current_ = pick;

  auto& w = windows_[pick];
  const auto op_index = static_cast<std::uint32_t>(w.cursor);
  const TraceOp& op = w.tb->ops[w.cursor];
  if (issues_) issues_->push_back({now, id_, static_cast<std::uint32_t>(pick), w.tb->tb_id, op_index});

  switch (op.kind) {
    case OpKind::Compute:
      if (w.bubble_left == 0) w.bubble_left = op.bubble_cycles;
      ++counters_.bubbles;
      if (--w.bubble_left == 0) {
        ++w.cursor;
        ++counters_.ops_issued;
      }
      break;
    case OpKind::Read:
    case OpKind::Write: {
      const bool is_write = op.kind == OpKind::Write;
      ++w.cursor;
      ++counters_.ops_issued;
      if (!is_write && l1_.read(op.addr)) {
        ++counters_.l1_read_hits;
        if (completions_) completions_->push_back({w.tb->tb_id, op_index, op.addr, false});
        break;
      }
      if (is_write) {
        l1_.write(op.addr);
        ++counters_.writes;
      } else if (auto it = l1_mshr_.find(op.addr); it != l1_mshr_.end()) {
        it->second.push_back({static_cast<std::uint32_t>(pick), w.tb->tb_id, op_index});
        ++w.outstanding;
        ++counters_.l1_merges;
        break;
      } else {
        ++counters_.l1_read_misses;
        l1_mshr_.emplace(op.addr, std::vector<L1Waiter>{});
      }
      MemRequest r;
      r.id = next_request_id++;
      r.core = id_;
      r.window = static_cast<std::uint32_t>(pick);
      r.tb_id = w.tb->tb_id;
      r.op_index = op_index;
      r.line = op.addr;
      r.is_write = is_write;
      r.issued = now;
      out.push_back(r);
      ++w.outstanding;
      ++counters_.requests_issued;
      break;
    }
  }
  try_retire(now, pick);
}

void Core::on_response(Cycle now, const MemResponse& r) {
  auto& w = windows_.at(r.window);
  if (!w.tb || w.tb->tb_id != r.tb_id || w.outstanding == 0) {
    throw std::logic_error("response for core " + std::to_string(id_) + " window " + std::to_string(r.window) +
                           " does not match its thread block");
  }
  --w.outstanding;
  ++counters_.responses;
  if (completions_) completions_->push_back({r.tb_id, r.op_index, r.line, r.is_write});
  if (!r.is_write) {
    l1_.fill(r.line);
    auto node = l1_mshr_.extract(r.line);
    if (!node.empty()) {
      for (const auto& t : node.mapped()) {
        --windows_[t.window].outstanding;
        if (completions_) completions_->push_back({t.tb_id, t.op_index, r.line, false});
      }
      for (const auto& t : node.mapped()) try_retire(now, t.window);
    }
  }
  try_retire(now, r.window);
}

void Core::try_retire(Cycle now, std::size_t i) {
  auto& w = windows_[i];
  if (!w.tb || w.cursor < w.tb->ops.size() || w.outstanding > 0) return;
  w.tb.reset();
  w.cursor = 0;
  ++counters_.blocks_executed;
  counters_.last_block_done = now;
  assign_thread_blocks();
}

void Core::end_sub_period(const ThrottleConfig& cfg) {
  if (throttled_) max_tb_ = incore_step(max_tb_, c_mem_, c_idle_, cfg, static_cast<std::uint32_t>(windows_.size()));
  c_mem_ = 0;
  c_idle_ = 0;
}

void Core::set_throttled(bool on, bool reset_on_unthrottle) {
  if (throttled_ && !on && reset_on_unthrottle) max_tb_ = static_cast<std::uint32_t>(windows_.size());
  throttled_ = on;
}

std::optional<ThreadBlock> Core::steal_tail() {
  if (pending_.empty()) return std::nullopt;
  ThreadBlock tb = std::move(pending_.back());
  pending_.pop_back();
  ++counters_.steals_out;
  return tb;
}

void Core::receive_stolen(ThreadBlock tb) {
  pending_.push_back(std::move(tb));
  ++counters_.steals_in;
  assign_thread_blocks();
}

std::size_t steal_thread_blocks(std::vector<Core>& cores) {
  std::size_t moved = 0;
  for (auto& thief : cores) {
    if (!thief.out_of_work()) continue;
    Core* donor = nullptr;
    for (auto& c : cores) {
      if (c.pending_count() > 0 && (!donor || c.pending_count() > donor->pending_count())) donor = &c;
    }
    if (!donor) break;
    thief.receive_stolen(*donor->steal_tail());
    ++moved;
  }
  return moved;
}

}  // namespace mhasim
