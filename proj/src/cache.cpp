#include "mhasim/cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace mhasim {

SetAssocArray::SetAssocArray(std::uint64_t num_sets, std::uint32_t ways)
    : num_sets_(num_sets), ways_(ways), ways_storage_(num_sets * ways) {
  if (num_sets == 0 || ways == 0) throw ConfigError("cache array needs at least one set and one way");
}

SetAssocArray::Way* SetAssocArray::find(std::uint64_t set, Addr line) {
  Way* base = &ways_storage_[set * ways_];
  for (std::uint32_t w = 0; w < ways_; ++w) {
    if (base[w].valid && base[w].line == line) return &base[w];
  }
  return nullptr;
}

const SetAssocArray::Way* SetAssocArray::find(std::uint64_t set, Addr line) const {
  return const_cast<SetAssocArray*>(this)->find(set, line);
}

bool SetAssocArray::access(std::uint64_t set, Addr line) {
  Way* w = find(set, line);
  if (!w) return false;
  w->stamp = ++clock_;
  return true;
}

bool SetAssocArray::contains(std::uint64_t set, Addr line) const { return find(set, line) != nullptr; }

bool SetAssocArray::mark_dirty(std::uint64_t set, Addr line) {
  Way* w = find(set, line);
  if (!w) return false;
  w->dirty = true;
  return true;
}

std::optional<SetAssocArray::Victim> SetAssocArray::fill(std::uint64_t set, Addr line, bool dirty) {
  if (Way* w = find(set, line)) {
    w->dirty = w->dirty || dirty;
    w->stamp = ++clock_;
    return std::nullopt;
  }
  Way* base = &ways_storage_[set * ways_];
  Way* slot = nullptr;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    if (!base[w].valid) {
      slot = &base[w];
      break;
    }
    if (!slot || base[w].stamp < slot->stamp) slot = &base[w];
  }
  std::optional<Victim> victim;
  if (slot->valid) victim = Victim{slot->line, slot->dirty};
  *slot = Way{line, ++clock_, true, dirty};
  return victim;
}

L1Cache::L1Cache(const CacheConfig& cfg) : line_size_(cfg.line_size), array_(cfg.num_sets(), cfg.associativity) {}

MshrEntry* Mshr::find(Addr line) {
  for (auto& e : entries_) {
    if (e.line == line) return &e;
  }
  return nullptr;
}

const MshrEntry* Mshr::find(Addr line) const { return const_cast<Mshr*>(this)->find(line); }

MshrEntry& Mshr::allocate(Addr line) {
  if (full()) throw std::logic_error("MSHR allocate while full");
  if (find(line)) throw std::logic_error("duplicate MSHR entry");
  entries_.push_back(MshrEntry{line, {}, false});
  entries_.back().targets.reserve(num_target_);
  return entries_.back();
}

MshrEntry Mshr::release(Addr line) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const MshrEntry& e) { return e.line == line; });
  if (it == entries_.end()) throw std::logic_error("MSHR release of unknown line");
  MshrEntry e = std::move(*it);
  entries_.erase(it);
  return e;
}

void Mshr::snapshot(std::vector<MshrSnapshotEntry>& out) const {
  out.clear();
  for (const auto& e : entries_) out.push_back({e.line, static_cast<std::uint32_t>(e.targets.size())});
}

L2Slice::L2Slice(const SimConfig& cfg, std::uint32_t slice_id)
    : id_(slice_id),
      line_size_(cfg.line_size),
      num_slices_(cfg.num_slices),
      hit_latency_(cfg.l2.hit_latency),
      data_latency_(cfg.l2.data_latency),
      depth_(cfg.l2.hit_latency + cfg.l2.mshr_latency),
      req_q_cap_(cfg.l2.req_q_size),
      resp_q_cap_(cfg.l2.resp_q_size),
      rr_policy_(cfg.arbiter.resp_arbitration),
      array_(cfg.l2.num_sets() / cfg.num_slices, cfg.l2.associativity),
      mshr_(cfg.l2.mshr_num_entry, cfg.l2.mshr_num_target),
      arbiter_(cfg.arbiter, cfg.num_cores, cfg.l2.hit_latency, cfg.l2.mshr_latency),
      slots_(depth_ + 1) {
  req_q_.reserve(req_q_cap_);
}

void L2Slice::accept(const MemRequest& r) {
  if (!can_accept()) throw std::logic_error("request queue overflow");
  req_q_.push_back(r);
}

bool L2Slice::can_admit() const { return !stalled_ && !slots_[0] && !req_q_.empty(); }

void L2Slice::admit(Cycle now) {
  mshr_.snapshot(snapshot_buf_);
  const std::size_t idx = arbiter_.select(req_q_, snapshot_buf_, now);
  slots_[0] = Slot{req_q_[idx], false};
  req_q_.erase(req_q_.begin() + static_cast<std::ptrdiff_t>(idx));
}

void L2Slice::tag_check(Cycle now, Slot& s, bool& remove) {
  s.tag_checked = true;
  ++counters_.lookups;
  const MemRequest& r = s.req;
  const auto set = local_set(r.line);
  const bool hit = array_.access(set, r.line);
  if (lookups_) lookups_->push_back({now, r.id, r.tb_id, r.op_index, r.line, r.is_write, hit});
  if (hit) {
    ++counters_.hits;
    if (r.is_write) array_.mark_dirty(set, r.line);
    hit_returns_.emplace_back(now + data_latency_, response_for(r));
    arbiter_.on_hit_observed(r.line);
    remove = true;
  } else {
    ++counters_.misses;
  }
}

bool L2Slice::mshr_probe(const MemRequest& r, SliceOutputs& out) {
  const MshrTarget t = response_for(r);
  if (MshrEntry* e = mshr_.find(r.line)) {
    if (e->targets.size() >= mshr_.num_target()) {
      ++counters_.target_stall_cycles;
      return false;
    }
    e->targets.push_back(t);
    e->dirty = e->dirty || r.is_write;
    ++counters_.mshr_merges;
    return true;
  }
  if (mshr_.full()) return false;
  MshrEntry& e = mshr_.allocate(r.line);
  e.targets.push_back(t);
  e.dirty = r.is_write;
  out.dram.push_back({r.line, false, id_});
  ++counters_.mshr_allocs;
  ++counters_.dram_reads;
  return true;
}

void L2Slice::process_fill(SliceOutputs& out) {
  const Fill f = resp_q_.front();
  resp_q_.pop_front();
  ++counters_.fills;
  if (auto victim = array_.fill(local_set(f.line), f.line, f.dirty); victim && victim->dirty) {
    out.dram.push_back({victim->line, true, id_});
    ++counters_.writebacks;
  }
}

void L2Slice::tick(Cycle now, SliceOutputs& out) {
  arbiter_.age(now);

  while (!hit_returns_.empty() && hit_returns_.front().first <= now) {
    out.responses.push_back(hit_returns_.front().second);
    hit_returns_.pop_front();
  }
  while (!fill_overflow_.empty() && resp_q_.size() < resp_q_cap_) {
    resp_q_.push_back(fill_overflow_.front());
    fill_overflow_.pop_front();
  }

  // A head still waiting for an MSHR reservation freezes every stage.
  if (!slots_[depth_]) {
    for (std::size_t i = depth_; i > 0; --i) slots_[i] = std::move(slots_[i - 1]);
    slots_[0].reset();
    if (auto& s = slots_[hit_latency_]; s && !s->tag_checked) {
      bool remove = false;
      tag_check(now, *s, remove);
      if (remove) s.reset();
    }
  }
  stalled_ = false;
  if (auto& head = slots_[depth_]) {
    if (mshr_probe(head->req, out)) {
      head.reset();
    } else {
      stalled_ = true;
      ++counters_.stall_cycles;
    }
  }

  // Request and fill paths share the storage port.
  const bool can_req = can_admit();
  const bool has_fill = !resp_q_.empty();
  if (rr_policy_ == RespArbitration::ResponseFirst) {
    if (has_fill) process_fill(out);
    else if (can_req) admit(now);
  } else if (resp_q_.size() >= resp_q_cap_) {
    if (rr_turn_request_ && can_req) {
      admit(now);
      rr_turn_request_ = false;
    } else if (has_fill) {
      process_fill(out);
      rr_turn_request_ = true;
    }
  } else if (can_req) {
    admit(now);
  } else if (has_fill) {
    process_fill(out);
  }

  counters_.occupancy_integral += mshr_.size();
}

void L2Slice::dram_response(Cycle now, Addr line, SliceOutputs& out) {
  (void)now;
  if (!mshr_.find(line)) {
    throw std::logic_error("DRAM response for line with no waiting MSHR entry (slice " + std::to_string(id_) + ")");
  }
  MshrEntry e = mshr_.release(line);
  for (const auto& t : e.targets) out.responses.push_back(t);
  const Fill f{line, e.dirty};
  if (resp_q_.size() < resp_q_cap_) resp_q_.push_back(f);
  else fill_overflow_.push_back(f);
}

bool L2Slice::idle() const {
  return req_q_.empty() && resp_q_.empty() && fill_overflow_.empty() && hit_returns_.empty() && mshr_.size() == 0 &&
         std::none_of(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); });
}

}  // namespace mhasim
