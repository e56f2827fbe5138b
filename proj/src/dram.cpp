#include "mhasim/dram.hpp"

#include <algorithm>

namespace mhasim {

DramAddress address_map(Addr line, const DramConfig& cfg, std::uint32_t line_size) {
  std::uint64_t n = line / line_size;
  DramAddress a;
  const std::uint64_t cols = cfg.row_size / line_size;
  const std::uint64_t banks = std::uint64_t{cfg.banks_per_rank} * cfg.ranks_per_channel;
  a.channel = static_cast<std::uint32_t>(n % cfg.num_channels);
  n /= cfg.num_channels;
  a.column = static_cast<std::uint32_t>(n % cols);
  n /= cols;
  std::uint64_t bank = n % banks;
  n /= banks;
  a.row = n;
  // Permutation interleaving: fold the low row bits into the bank index so
  // regions a power-of-two apart do not pile onto the same banks.
  if (cfg.bank_permute) bank = (bank + a.row) % banks;
  a.bank = static_cast<std::uint32_t>(bank % cfg.banks_per_rank);
  a.rank = static_cast<std::uint32_t>(bank / cfg.banks_per_rank);
  return a;
}

DramController::DramController(const DramConfig& cfg, std::uint32_t line_size)
    : cfg_(cfg), line_size_(line_size), channels_(cfg.num_channels) {
  for (auto& ch : channels_) ch.banks.resize(std::size_t{cfg.ranks_per_channel} * cfg.banks_per_rank);
}

void DramController::enqueue(Cycle now, const DramRequest& req) {
  Pending p{req, address_map(req.line, cfg_, line_size_), now, next_seq_++};
  Channel& ch = channels_[p.da.channel];
  if (ch.queue.size() < cfg_.queue_depth && ch.overflow.empty()) ch.queue.push_back(p);
  else ch.overflow.push_back(p);
}

void DramController::schedule_frfcfs(Cycle now, std::uint32_t ch_id, Channel& ch) {
  auto bank_of = [&](const Pending& p) -> Bank& {
    return ch.banks[std::size_t{p.da.rank} * cfg_.banks_per_rank + p.da.bank];
  };
  auto is_hit = [&](const Pending& p) {
    const Bank& b = bank_of(p);
    return b.open && b.row == p.da.row;
  };
  auto rd_ready = [&](const Pending& p) { return is_hit(p) && bank_of(p).rd_ready <= now && ch.next_rd <= now; };

  // Oldest issuable row hit takes the column slot.
  for (std::size_t i = 0; i < ch.queue.size(); ++i) {
    Pending& p = ch.queue[i];
    if (!rd_ready(p)) continue;
    Bank& b = bank_of(p);
    const Cycle data_start = now + cfg_.t_cas;
    const Cycle done = data_start + cfg_.t_burst;
    b.pre_ready = std::max(b.pre_ready, now + cfg_.t_burst);
    ch.next_rd = now + cfg_.t_burst;
    counters_.busy_cycles += cfg_.t_burst;
    if (!p.started) {
      p.started = true;
      p.row_hit = true;
      for (std::size_t k = 0; k < i; ++k) p.first_older_ready = p.first_older_ready || rd_ready(ch.queue[k]);
    }
    if (p.row_hit) ++counters_.row_hits;
    else ++counters_.row_misses;
    ch.in_flight.push_back({done, p.seq, {p.req.line, p.req.is_write, p.req.slice}, p.arrival});
    if (trace_on_) {
      trace_.push_back(
          {now, ch_id, p.seq, p.row_hit, p.first_hit_ready, p.first_older_ready, data_start, done});
    }
    ch.queue.erase(ch.queue.begin() + static_cast<std::ptrdiff_t>(i));
    return;
  }

  // Otherwise PRE or ACT for the oldest request whose bank can take one. An
  // open row keeps its bank while queued requests still hit it.
  auto open_row_wanted = [&](const Bank& b) {
    return std::any_of(ch.queue.begin(), ch.queue.end(), [&](const Pending& q) { return &bank_of(q) == &b && is_hit(q); });
  };
  auto can_command = [&](const Pending& p) {
    const Bank& b = bank_of(p);
    if (is_hit(p)) return false;
    if (b.open) return b.pre_ready <= now && !open_row_wanted(b);
    return b.act_ready <= now;
  };
  for (std::size_t i = 0; i < ch.queue.size(); ++i) {
    Pending& p = ch.queue[i];
    if (!can_command(p)) continue;
    Bank& b = bank_of(p);
    if (!p.started) {
      p.started = true;
      p.row_hit = false;
      p.first_hit_ready = std::any_of(ch.queue.begin(), ch.queue.end(), rd_ready);
    }
    if (b.open) {
      b.open = false;
      b.act_ready = now + cfg_.t_rp;
    } else {
      b.open = true;
      b.row = p.da.row;
      b.rd_ready = now + cfg_.t_rcd;
      b.pre_ready = now + cfg_.t_rcd;
    }
    return;
  }
}

void DramController::schedule_simple(Cycle now, Channel& ch) {
  while (!ch.queue.empty() && ch.in_flight.size() < cfg_.simple_max_outstanding) {
    const Pending& p = ch.queue.front();
    ch.in_flight.push_back({now + cfg_.simple_latency, p.seq, {p.req.line, p.req.is_write, p.req.slice}, p.arrival});
    ch.queue.pop_front();
  }
}

void DramController::tick(Cycle now, std::vector<DramCompletion>& done) {
  for (std::uint32_t c = 0; c < channels_.size(); ++c) {
    Channel& ch = channels_[c];
    while (!ch.overflow.empty() && ch.queue.size() < cfg_.queue_depth) {
      ch.queue.push_back(ch.overflow.front());
      ch.overflow.pop_front();
    }
    if (cfg_.mode == DramMode::FrFcfs) schedule_frfcfs(now, c, ch);
    else schedule_simple(now, ch);

    // Completion times are nondecreasing per channel.
    std::size_t n = 0;
    while (n < ch.in_flight.size() && ch.in_flight[n].done <= now) {
      const auto& f = ch.in_flight[n];
      if (f.c.is_write) ++counters_.writes;
      else ++counters_.reads;
      counters_.latency_sum += f.done - f.arrival;
      done.push_back(f.c);
      ++n;
    }
    ch.in_flight.erase(ch.in_flight.begin(), ch.in_flight.begin() + static_cast<std::ptrdiff_t>(n));
  }
}

bool DramController::idle() const {
  return std::all_of(channels_.begin(), channels_.end(), [](const Channel& ch) {
    return ch.queue.empty() && ch.overflow.empty() && ch.in_flight.empty();
  });
}

}  // namespace mhasim
