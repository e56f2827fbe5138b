#include "mhasim/arbiter.hpp"

#include <algorithm>

namespace mhasim {

namespace {

bool contains(const std::vector<Addr>& v, Addr a) { return std::find(v.begin(), v.end(), a) != v.end(); }

}  // namespace

void HitBuffer::push(Addr line) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(line);
}

bool HitBuffer::contains(Addr line) const { return std::find(items_.begin(), items_.end(), line) != items_.end(); }

void SentReqs::age(Cycle now) {
  while (!items_.empty() && items_.front().issued + residency_ <= now) items_.pop_front();
}

ReqClass MergedView::classify(Addr line) const {
  if (contains(hits, line)) return ReqClass::InferredHit;
  if (contains(mshr_resident, line)) return ReqClass::InferredMshrResident;
  return ReqClass::Other;
}

MergedView build_merged_view(const HitBuffer& hb, std::span<const MshrSnapshotEntry> snapshot, const SentReqs& sent) {
  MergedView v;
  for (Addr a : hb.items()) {
    if (!contains(v.hits, a)) v.hits.push_back(a);
  }
  for (const auto& e : snapshot) {
    if (!contains(v.mshr_resident, e.line)) v.mshr_resident.push_back(e.line);
  }
  // A sent request speculated as a hit never holds an MSHR entry.
  for (const auto& s : sent.items()) {
    if (!s.spec_hit && !contains(v.mshr_resident, s.line)) v.mshr_resident.push_back(s.line);
  }
  v.estimated_entries = v.mshr_resident.size();
  return v;
}

std::size_t select_request(ArbiterPolicy policy, std::span<const MemRequest> queue, const MergedView& view,
                           const ProgressCounters& counters) {
  auto counter = [&](const MemRequest& r) { return counters.served[r.core]; };
  auto cls = [&](const MemRequest& r) { return static_cast<int>(view.classify(r.line)); };

  std::size_t best = 0;
  switch (policy) {
    case ArbiterPolicy::Fcfs:
      return 0;
    case ArbiterPolicy::Balanced:
      for (std::size_t i = 1; i < queue.size(); ++i) {
        if (counter(queue[i]) < counter(queue[best])) best = i;
      }
      return best;
    case ArbiterPolicy::MshrAware:
      for (std::size_t i = 1; i < queue.size(); ++i) {
        if (cls(queue[i]) > cls(queue[best])) best = i;
      }
      return best;
    case ArbiterPolicy::BalancedMshrAware:
      for (std::size_t i = 1; i < queue.size(); ++i) {
        const int ci = cls(queue[i]), cb = cls(queue[best]);
        if (ci > cb || (ci == cb && counter(queue[i]) < counter(queue[best]))) best = i;
      }
      return best;
  }
  return best;
}

Arbiter::Arbiter(const ArbiterConfig& cfg, std::uint32_t num_cores, std::uint32_t hit_latency,
                 std::uint32_t mshr_latency)
    : policy_(cfg.policy), hit_buffer_(cfg.hit_buffer_size), sent_(hit_latency + mshr_latency), counters_(num_cores) {}

std::size_t Arbiter::select(std::span<const MemRequest> queue, std::span<const MshrSnapshotEntry> snapshot,
                            Cycle now) {
  sent_.age(now);
  const MergedView view = build_merged_view(hit_buffer_, snapshot, sent_);
  const std::size_t idx = select_request(policy_, queue, view, counters_);
  const MemRequest& r = queue[idx];
  const ReqClass c = view.classify(r.line);
  if (c == ReqClass::InferredHit) ++inferred_hits_issued;
  if (c == ReqClass::InferredMshrResident) ++inferred_mshr_issued;
  sent_.push({r.line, c == ReqClass::InferredHit, now});
  ++counters_.served[r.core];
  return idx;
}

}  // namespace mhasim
