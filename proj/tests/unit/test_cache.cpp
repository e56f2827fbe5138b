#include <doctest.h>

#include <list>
#include <map>
#include <random>

#include "mhasim/cache.hpp"

using namespace mhasim;

namespace {

SimConfig slice_config(std::uint32_t cores = 4) {
  SimConfig c = SimConfig::defaults();
  c.num_cores = cores;
  c.num_slices = 1;
  c.l2.size_bytes = 64 * 1024;
  return c;
}

MemRequest req(std::uint64_t id, Addr line, CoreId core = 0, bool write = false) {
  MemRequest r;
  r.id = id;
  r.core = core;
  r.line = line;
  r.is_write = write;
  return r;
}

// Drives one slice in engine order: slice tick, then DRAM returns due this
// cycle. Reads come back `dram_latency` cycles after dispatch.
struct SliceDriver {
  SimConfig cfg;
  L2Slice slice;
  Cycle now = 0;
  Cycle dram_latency;
  std::vector<std::pair<Cycle, MemResponse>> responses;
  std::vector<std::pair<Cycle, DramRequest>> dram;
  std::multimap<Cycle, Addr> returns;
  std::vector<bool> stall_trace;

  explicit SliceDriver(const SimConfig& c, Cycle lat = 100) : cfg(c), slice(c, 0), dram_latency(lat) {}

  void step() {
    SliceOutputs out;
    slice.tick(now, out);
    stall_trace.push_back(slice.stalled());
    auto [lo, hi] = returns.equal_range(now);
    std::vector<Addr> due;
    for (auto it = lo; it != hi; ++it) due.push_back(it->second);
    returns.erase(lo, hi);
    for (Addr a : due) slice.dram_response(now, a, out);
    for (const auto& r : out.responses) responses.emplace_back(now, r);
    for (const auto& d : out.dram) {
      dram.emplace_back(now, d);
      if (!d.is_write && dram_latency) returns.emplace(now + dram_latency, d.line);
    }
    ++now;
  }
  void run(Cycle n) {
    for (Cycle i = 0; i < n; ++i) step();
  }
  void run_until_idle(Cycle limit = 100000) {
    while (!(slice.idle() && returns.empty()) && limit--) step();
  }
  std::optional<Cycle> response_cycle(std::uint64_t id) const {
    for (const auto& [c, r] : responses) {
      if (r.request_id == id) return c;
    }
    return std::nullopt;
  }
};

}  // namespace

TEST_CASE("set-associative array evicts the least recently used way") {
  SetAssocArray a(1, 2);
  CHECK_FALSE(a.fill(0, 0x00, false));
  CHECK_FALSE(a.fill(0, 0x40, true));
  CHECK(a.access(0, 0x00));
  auto v = a.fill(0, 0x80, false);
  REQUIRE(v);
  CHECK(v->line == 0x40);
  CHECK(v->dirty);
  CHECK(a.contains(0, 0x00));
  CHECK_FALSE(a.contains(0, 0x40));
}

TEST_CASE("L1 read of a filled line hits") {
  L1Cache l1(SimConfig::defaults().l1);
  CHECK_FALSE(l1.read(0x1000));
  l1.fill(0x1000);
  CHECK(l1.read(0x1000));
}

TEST_CASE("L1 write never allocates") {
  L1Cache l1(SimConfig::defaults().l1);
  CHECK_FALSE(l1.write(0x2000));
  CHECK_FALSE(l1.contains(0x2000));
}

TEST_CASE("nine lines in one 8-way L1 set evict the first one") {
  const CacheConfig cfg = SimConfig::defaults().l1;
  L1Cache l1(cfg);
  const Addr stride = cfg.num_sets() * cfg.line_size;
  // Functional oracle: a per-set list in recency order.
  std::list<Addr> lru;
  auto oracle_read = [&](Addr a) {
    auto it = std::find(lru.begin(), lru.end(), a);
    const bool hit = it != lru.end();
    if (hit) lru.erase(it);
    else if (lru.size() == cfg.associativity) lru.pop_back();
    lru.push_front(a);
    return hit;
  };
  for (Addr i = 0; i < 9; ++i) {
    const Addr a = i * stride;
    const bool hit = l1.read(a);
    if (!hit) l1.fill(a);
    CHECK(hit == oracle_read(a));
  }
  CHECK_FALSE(l1.read(0));
  CHECK_FALSE(oracle_read(0));
}

TEST_CASE("a resident line answers 28 cycles after it enters lookup") {
  SliceDriver d(slice_config());
  d.slice.accept(req(1, 0x40));
  d.run_until_idle();
  REQUIRE(d.slice.resident(0x40));
  d.run(3);
  const Cycle admit = d.now;
  d.slice.accept(req(2, 0x40));
  d.run(40);
  REQUIRE(d.response_cycle(2));
  CHECK(*d.response_cycle(2) - admit == 3 + 25);
  CHECK(d.slice.counters().hits == 1);
}

TEST_CASE("a miss probes the MSHR hit + mshr latency after admission") {
  SliceDriver d(slice_config(), 0);
  d.slice.accept(req(1, 0x40));
  d.run(20);
  REQUIRE(d.dram.size() == 1);
  CHECK(d.dram[0].first == 3 + 5);
  CHECK_FALSE(d.dram[0].second.is_write);
}

TEST_CASE("a request to a line with seven targets merges as the eighth") {
  SliceDriver d(slice_config(8), 0);
  for (std::uint64_t i = 0; i < 9; ++i) d.slice.accept(req(i, 0x80, static_cast<CoreId>(i % 8)));
  // The ninth is admitted at cycle 8 and probes at cycle 16.
  d.run(17);
  REQUIRE(d.slice.mshr().size() == 1);
  CHECK(d.slice.mshr().entries()[0].targets.size() == 8);
  CHECK(d.slice.counters().mshr_merges == 7);
  CHECK(d.slice.counters().mshr_allocs == 1);
  // The ninth cannot merge and holds the pipeline.
  CHECK(d.slice.stalled());
  CHECK(d.slice.counters().target_stall_cycles > 0);
}

TEST_CASE("six outstanding entries stall a distinct miss and a would-be hit behind it") {
  SimConfig c = slice_config();
  SliceDriver d(c, 0);
  // Make 0x1000 resident first.
  d.dram_latency = 10;
  d.slice.accept(req(100, 0x1000));
  d.run_until_idle();
  REQUIRE(d.slice.resident(0x1000));
  const Cycle base = d.now;
  d.dram_latency = 0;

  for (std::uint64_t i = 0; i < 6; ++i) d.slice.accept(req(i, 0x40 * (i + 1)));
  d.slice.accept(req(6, 0x400));  // seventh distinct miss
  d.run(20);
  REQUIRE(d.slice.stalled());
  d.slice.accept(req(7, 0x1000));  // would hit
  d.run(20);
  CHECK(d.slice.mshr().size() == 6);
  CHECK(d.slice.stalled());
  CHECK_FALSE(d.response_cycle(7));
  CHECK(d.slice.counters().lookups == 1 + 7);  // the hit never reached the tag array

  // Free one entry: the stalled head allocates on the next cycle.
  SliceOutputs out;
  const Cycle free_at = d.now - 1;
  d.slice.dram_response(free_at, 0x40, out);
  CHECK(out.responses.size() == 1);
  const std::size_t before = d.dram.size();
  d.step();
  REQUIRE(d.dram.size() == before + 1);
  CHECK(d.dram.back().second.line == 0x400);
  CHECK(d.dram.back().first == free_at + 1);
  CHECK_FALSE(d.slice.stalled());
  // The seventh miss first probed at admission + 8; the slice stalled from
  // then until the cycle the entry was freed.
  const Cycle first_probe = base + 6 + 8;
  CHECK(d.slice.counters().stall_cycles == free_at - first_probe + 1);
  d.run(40);
  CHECK(d.response_cycle(7));
}

TEST_CASE("a DRAM return answers every target at once and queues one fill") {
  SliceDriver d(slice_config(), 0);
  for (std::uint64_t i = 0; i < 3; ++i) d.slice.accept(req(i, 0x80, static_cast<CoreId>(i)));
  d.run(12);
  REQUIRE(d.slice.mshr().size() == 1);
  SliceOutputs out;
  d.slice.dram_response(d.now, 0x80, out);
  CHECK(out.responses.size() == 3);
  CHECK(d.slice.response_queue_size() == 1);
  CHECK(d.slice.mshr().size() == 0);
  CHECK_THROWS_AS(d.slice.dram_response(d.now, 0x80, out), std::logic_error);
}

TEST_CASE("a full response queue delays the fill but not the forwarding") {
  SimConfig c = slice_config();
  c.l2.resp_q_size = 1;
  SliceDriver d(c, 0);
  d.slice.accept(req(1, 0x40));
  d.slice.accept(req(2, 0x80));
  d.run(12);
  REQUIRE(d.slice.mshr().size() == 2);
  SliceOutputs out;
  d.slice.dram_response(d.now, 0x40, out);
  d.slice.dram_response(d.now, 0x80, out);
  CHECK(out.responses.size() == 2);
  CHECK(d.slice.response_queue_size() == 1);
  CHECK_FALSE(d.slice.idle());
  d.run(4);
  CHECK(d.slice.resident(0x40));
  CHECK(d.slice.resident(0x80));
  CHECK(d.slice.idle());
}

TEST_CASE("dirty victims produce exactly one DRAM write each") {
  SimConfig c = slice_config();
  c.l2.size_bytes = 8 * 64;  // one set of eight ways
  SliceDriver d(c, 20);
  std::uint64_t id = 0;
  std::size_t dirty_lines = 0;
  for (Addr i = 0; i < 24; ++i) {
    const bool w = i % 2 == 0;
    dirty_lines += w;
    d.slice.accept(req(id++, i * 64, 0, w));
    d.run_until_idle();
  }
  std::size_t writes = 0;
  for (const auto& [cyc, r] : d.dram) writes += r.is_write;
  CHECK(writes == d.slice.counters().writebacks);
  // 24 lines through 8 ways: the first 16 were evicted, half of them dirty.
  CHECK(writes == 8);
  (void)dirty_lines;
}

TEST_CASE("write hits mark the line dirty") {
  SimConfig c = slice_config();
  c.l2.size_bytes = 8 * 64;
  SliceDriver d(c, 20);
  d.slice.accept(req(1, 0));
  d.run_until_idle();
  d.slice.accept(req(2, 0, 0, true));
  d.run_until_idle();
  for (Addr i = 1; i <= 8; ++i) {
    d.slice.accept(req(10 + i, i * 64));
    d.run_until_idle();
  }
  std::size_t writes = 0;
  for (const auto& [cyc, r] : d.dram) {
    if (r.is_write) {
      ++writes;
      CHECK(r.line == 0);
    }
  }
  CHECK(writes == 1);
}

TEST_CASE("random traffic keeps MSHR bounds and the miss partition") {
  SimConfig c = slice_config(8);
  c.l2.size_bytes = 16 * 1024;
  SliceDriver d(c, 37);
  std::mt19937 rng(5);
  std::uint64_t id = 0;
  std::size_t issued = 0;
  for (int cyc = 0; cyc < 20000; ++cyc) {
    if (d.slice.can_accept() && rng() % 3 != 0) {
      d.slice.accept(req(id++, 64 * (rng() % 512), static_cast<CoreId>(rng() % 8), rng() % 10 == 0));
      ++issued;
    }
    d.step();
    REQUIRE(d.slice.mshr().size() <= c.l2.mshr_num_entry);
    for (const auto& e : d.slice.mshr().entries()) REQUIRE(e.targets.size() <= c.l2.mshr_num_target);
  }
  d.run_until_idle();
  const auto& k = d.slice.counters();
  CHECK(k.mshr_merges + k.mshr_allocs == k.misses);
  CHECK(k.hits + k.misses == k.lookups);
  CHECK(k.lookups == issued);
  CHECK(d.responses.size() == issued);
}

TEST_CASE("stalled slice admits nothing") {
  SimConfig c = slice_config();
  c.l2.mshr_num_entry = 1;
  SliceDriver d(c, 60);
  for (std::uint64_t i = 0; i < 10; ++i) d.slice.accept(req(i, 64 * (i + 1)));
  std::size_t q_before = d.slice.request_queue().size();
  for (int i = 0; i < 200; ++i) {
    d.step();
    const std::size_t q = d.slice.request_queue().size();
    if (d.stall_trace.back()) CHECK(q == q_before);
    q_before = q;
  }
}

TEST_CASE("MSHR file refuses duplicates and overflow") {
  Mshr m(1, 2);
  m.allocate(0x40);
  CHECK(m.full());
  CHECK_THROWS_AS(m.allocate(0x80), std::logic_error);
  Mshr m2(2, 2);
  m2.allocate(0x40);
  CHECK_THROWS_AS(m2.allocate(0x40), std::logic_error);
  CHECK_THROWS_AS(m2.release(0x80), std::logic_error);
}
