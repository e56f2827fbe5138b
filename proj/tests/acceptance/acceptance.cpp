// Acceptance checks. With no arguments every criterion runs; otherwise only
// the listed numbers. One PASS/FAIL line per criterion; exit status 1 if any
// failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <iostream>
#include <list>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mhasim/arbiter.hpp"
#include "mhasim/engine.hpp"
#include "mhasim/throttle.hpp"
#include "mhasim/workload.hpp"

using namespace mhasim;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Throttle state machine

Result throttle_state_machine() {
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  std::size_t checked = 0;

  // Next gear for max_gear 4, rows = current gear, columns = Low, Normal, High, Extreme.
  const std::uint32_t table[5][4] = {{0, 0, 1, 2}, {0, 1, 2, 3}, {1, 2, 3, 4}, {2, 3, 4, 4}, {3, 4, 4, 4}};
  for (std::uint32_t g = 0; g <= 4; ++g) {
    for (int c = 0; c < 4; ++c, ++checked) {
      if (step_gear({g, 4}, static_cast<Contention>(c)).gear != table[g][c]) ++bad;
    }
  }
  // Smaller maximum gears, against the gear-adjust rules written out directly.
  for (std::uint32_t mg = 0; mg <= 4; ++mg) {
    for (std::uint32_t g = 0; g <= mg; ++g) {
      for (int c = 0; c < 4; ++c, ++checked) {
        std::uint32_t want = g;
        if (c == 2 && g < mg) want = g + 1;
        if (c == 0 && g > 0) want = g - 1;
        if (c == 3) want = (g + 2 <= mg) ? g + 2 : mg;
        if (step_gear({g, mg}, static_cast<Contention>(c)).gear != want) ++bad;
      }
    }
  }
  // Contention bands: [0, .1) low, [.1, .2) normal, [.2, .375) high, [.375, 1] extreme.
  for (int i = 0; i <= 100000; ++i, ++checked) {
    const double x = i / 100000.0;
    const int want = x < 0.1 ? 0 : x < 0.2 ? 1 : x < 0.375 ? 2 : 3;
    if (static_cast<int>(classify_contention(x)) != want) ++bad;
  }
  // Throttled share per gear: none, 1/8, 1/4, 1/2, 3/4 of the cores.
  const double share[5] = {0.0, 1.0 / 8, 1.0 / 4, 1.0 / 2, 3.0 / 4};
  for (std::size_t cores : {8u, 16u, 32u, 64u}) {
    for (std::uint32_t g = 0; g <= 4; ++g, ++checked) {
      if (throttled_count(g, cores) != static_cast<std::size_t>(share[g] * static_cast<double>(cores))) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 1.0,
          std::to_string(checked) + " cases, " + std::to_string(bad) + " mismatches, " + fmt("%.3f s", secs)};
}

// ---------------------------------------------------------------------------
// 2. MSHR bounds on randomized traffic

std::vector<CoreTrace> contended_traces(std::uint64_t seed, std::uint32_t blocks_per_core) {
  std::mt19937_64 rng(seed);
  std::vector<CoreTrace> t(16);
  std::uint64_t id = 0;
  for (CoreId c = 0; c < 16; ++c) {
    for (std::uint32_t b = 0; b < blocks_per_core; ++b) {
      ThreadBlock tb;
      tb.tb_id = id++;
      tb.home_core = c;
      for (std::uint32_t i = 0; i < 64; ++i) {
        const auto r = rng() % 20;
        // Shared stream with jitter (merges), private far lines (misses), some writes.
        const Addr shared = 64 * ((b * 64 + i + rng() % 8) % 40000);
        const Addr priv = 0x4000000 + 64 * (rng() % 200000);
        if (r < 12) tb.ops.push_back(TraceOp::read(shared));
        else if (r < 17) tb.ops.push_back(TraceOp::read(priv));
        else if (r < 19) tb.ops.push_back(TraceOp::write(priv));
        else tb.ops.push_back(TraceOp::compute(1 + rng() % 3));
      }
      t[c].push_back(std::move(tb));
    }
  }
  return t;
}

Result mshr_bounds() {
  std::uint64_t requests = 0;
  std::uint64_t violations = 0;
  std::uint64_t merges = 0;
  std::uint64_t stall = 0;
  std::uint64_t cycles = 0;
  const std::pair<const char*, const char*> setups[] = {{"fcfs", "none"}, {"BMA", "dynmg"}};
  std::uint64_t seed = 1;
  for (const auto& [arb, thr] : setups) {
    SimConfig cfg = SimConfig::defaults();
    cfg.set("arbiter", arb);
    cfg.set("throttle", thr);
    cfg.set("l2_size", "1MB");
    Simulator sim(cfg, contended_traces(seed++, 120));
    sim.set_observer([&](Cycle, const Simulator& s) {
      for (const auto& sl : s.slices()) {
        if (sl.mshr().size() > 6) ++violations;
        for (const auto& e : sl.mshr().entries()) {
          if (e.targets.size() > 8) ++violations;
        }
      }
    });
    const StatsRecord st = sim.run();
    const auto misses = st.total(&SliceCounters::misses);
    if (st.total(&SliceCounters::mshr_merges) + st.total(&SliceCounters::mshr_allocs) != misses) ++violations;
    requests += st.total(&SliceCounters::lookups);
    merges += st.total(&SliceCounters::mshr_merges);
    stall += st.total(&SliceCounters::stall_cycles);
    cycles += st.cycles;
  }
  return {violations == 0 && requests >= 100000 && merges > 0 && stall > 0,
          std::to_string(requests) + " L2 requests over " + std::to_string(cycles) + " cycles, " +
              std::to_string(merges) + " merges, " + std::to_string(stall) + " stall cycles, " +
              std::to_string(violations) + " violations"};
}

// ---------------------------------------------------------------------------
// 3. Functional cache oracle

// LRU set-associative tag store, most recent at the front of each set.
class RefCache {
 public:
  RefCache(std::uint64_t sets, std::uint32_t ways) : sets_(sets), ways_(ways) {}
  bool touch(Addr line) {
    auto& s = sets_[index(line)];
    const auto it = std::find(s.begin(), s.end(), line);
    if (it == s.end()) return false;
    s.splice(s.begin(), s, it);
    return true;
  }
  void insert(Addr line) {
    auto& s = sets_[index(line)];
    s.push_front(line);
    if (s.size() > ways_) s.pop_back();
  }

 private:
  std::size_t index(Addr line) const { return (line / 64) % sets_.size(); }
  std::vector<std::list<Addr>> sets_;
  std::uint32_t ways_;
};

enum class Where : char { L1Hit = '1', L2Hit = 'H', L2Miss = 'M' };

Result functional_oracle() {
  std::mt19937_64 rng(2024);
  const int trials = 1200;
  std::size_t ops_checked = 0;
  std::size_t mismatches = 0;
  int failed_trials = 0;
  std::map<char, std::size_t> seen;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint32_t l1_ways = 1u << (rng() % 2);
    const std::uint32_t l2_ways = 1u << (rng() % 3);
    SimConfig cfg = SimConfig::defaults();
    cfg.set("num_cores", "1");
    cfg.set("num_slices", "1");
    cfg.set("dram_mode", "simple");
    cfg.set("dram_simple_latency", std::to_string(5 + rng() % 40));
    cfg.set("num_inst_windows", "1");
    cfg.set("inst_window_depth", "1");
    cfg.set("l1_size", "1KB");
    cfg.set("l1_assoc", std::to_string(l1_ways));
    cfg.set("l2_size", "4KB");
    cfg.set("l2_assoc", std::to_string(l2_ways));
    cfg.set("arbiter", (trial % 2) ? "BMA" : "fcfs");

    const std::uint64_t pool = 8 + rng() % 192;
    std::vector<CoreTrace> traces(1);
    const int blocks = 1 + static_cast<int>(rng() % 3);
    for (int b = 0; b < blocks; ++b) {
      ThreadBlock tb;
      tb.tb_id = static_cast<std::uint64_t>(b);
      const std::size_t n = 40 + rng() % 160;
      Addr prev = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = rng() % 10;
        const Addr line = (r < 3) ? prev : 64 * (rng() % pool);
        prev = line;
        if (r == 9) tb.ops.push_back(TraceOp::compute(1 + rng() % 2));
        else if (r >= 7) tb.ops.push_back(TraceOp::write(line));
        else tb.ops.push_back(TraceOp::read(line));
      }
      traces[0].push_back(std::move(tb));
    }

    // Reference: every op finishes before the next starts.
    RefCache l1(cfg.l1.num_sets(), l1_ways);
    RefCache l2(cfg.l2.num_sets(), l2_ways);
    std::map<std::pair<std::uint64_t, std::uint32_t>, Where> want;
    for (const auto& tb : traces[0]) {
      for (std::uint32_t i = 0; i < tb.ops.size(); ++i) {
        const TraceOp& op = tb.ops[i];
        if (op.kind == OpKind::Compute) continue;
        const bool write = op.kind == OpKind::Write;
        if (!write && l1.touch(op.addr)) {
          want[{tb.tb_id, i}] = Where::L1Hit;
          continue;
        }
        if (write) l1.touch(op.addr);
        const bool hit = l2.touch(op.addr);
        if (!hit) l2.insert(op.addr);
        if (!write) l1.insert(op.addr);
        want[{tb.tb_id, i}] = hit ? Where::L2Hit : Where::L2Miss;
      }
    }

    Simulator sim(cfg, traces);
    std::vector<LookupRecord> lookups;
    sim.record_lookups(&lookups);
    sim.run();
    std::map<std::pair<std::uint64_t, std::uint32_t>, Where> got;
    for (const auto& l : lookups) {
      if (!got.emplace(std::pair{l.tb_id, l.op_index}, l.hit ? Where::L2Hit : Where::L2Miss).second) ++mismatches;
    }
    for (const auto& tb : traces[0]) {
      for (std::uint32_t i = 0; i < tb.ops.size(); ++i) {
        if (tb.ops[i].kind == OpKind::Read) got.emplace(std::pair{tb.tb_id, i}, Where::L1Hit);
      }
    }
    std::size_t trial_bad = 0;
    for (const auto& [k, w] : want) {
      ++ops_checked;
      ++seen[static_cast<char>(w)];
      const auto it = got.find(k);
      if (it == got.end() || it->second != w) ++trial_bad;
    }
    if (got.size() != want.size()) ++trial_bad;
    mismatches += trial_bad;
    if (trial_bad) ++failed_trials;
  }
  return {mismatches == 0 && trials >= 1000,
          std::to_string(trials) + " traces, " + std::to_string(ops_checked) + " requests (" +
              std::to_string(seen['1']) + " L1 hits, " + std::to_string(seen['H']) + " L2 hits, " +
              std::to_string(seen['M']) + " L2 misses), " + std::to_string(mismatches) + " mismatches in " +
              std::to_string(failed_trials) + " traces"};
}

// ---------------------------------------------------------------------------
// 4. Arbitration policies change timing only

std::vector<CoreTrace> logit_traces(const char* model, std::uint64_t L) {
  const OperatorShape shape = model_preset(model, L);
  const MappingSpec m = build_logit_mapping(shape, 16, 1);
  return generate_traces(shape, m, default_layouts(shape), {16, 64, kVectorElems});
}

Result policy_metamorphic() {
  struct Case {
    std::string name;
    std::vector<CoreTrace> traces;
    std::string l2;
    std::string throttle;
  };
  std::vector<Case> cases;
  cases.push_back({"70b L=512", logit_traces("llama3-70b", 512), "16MB", "none"});
  cases.push_back({"70b L=512 dynmg", logit_traces("llama3-70b", 512), "16MB", "dynmg"});
  cases.push_back({"random", contended_traces(9, 20), "512KB", "none"});
  std::size_t mismatched = 0;
  std::size_t distinct_timings = 0;
  std::ostringstream det;
  for (const auto& c : cases) {
    std::vector<Completion> ref;
    std::set<Cycle> cyc;
    for (const char* p : {"fcfs", "B", "MA", "BMA"}) {
      SimConfig cfg = SimConfig::defaults();
      cfg.set("arbiter", p);
      cfg.set("throttle", c.throttle);
      cfg.set("l2_size", c.l2);
      Simulator sim(cfg, c.traces);
      std::vector<Completion> log;
      sim.record_completions(&log);
      cyc.insert(sim.run().cycles);
      std::sort(log.begin(), log.end());
      if (ref.empty()) ref = std::move(log);
      else if (log != ref) ++mismatched;
    }
    distinct_timings += cyc.size();
    det << c.name << ": " << ref.size() << " responses, " << cyc.size() << " distinct cycle counts; ";
  }
  det << mismatched << " multiset mismatches";
  return {mismatched == 0, det.str()};
}

// ---------------------------------------------------------------------------
// 5. Entry-limited miss throughput

Result littles_law() {
  const auto t0 = Clock::now();
  const std::uint32_t T = 400;
  std::ostringstream det;
  bool ok = true;
  for (std::uint32_t entries : {6u, 12u}) {
    SimConfig cfg = SimConfig::defaults();
    cfg.set("num_slices", "1");
    cfg.set("dram_mode", "simple");
    cfg.set("dram_simple_latency", std::to_string(T));
    cfg.set("mshr_num_entry", std::to_string(entries));
    std::vector<CoreTrace> t(16);
    Addr next = 0;
    for (CoreId c = 0; c < 16; ++c) {
      ThreadBlock tb;
      tb.tb_id = c;
      for (int i = 0; i < 400; ++i, next += 64) tb.ops.push_back(TraceOp::read(next));
      t[c].push_back(std::move(tb));
    }
    const StatsRecord st = run(cfg, std::move(t));
    const double measured = static_cast<double>(st.dram.reads) / static_cast<double>(st.cycles);
    const double expected = static_cast<double>(entries) / T;
    const double err = measured / expected - 1.0;
    ok = ok && std::abs(err) <= 0.10 && st.total(&SliceCounters::mshr_merges) == 0;
    det << entries << " entries: " << fmt("%.5f", measured) << " lines/cycle vs " << fmt("%.5f", expected) << " ("
        << fmt("%+.2f%%", 100 * err) << "); ";
  }
  const double secs = seconds_since(t0);
  det << fmt("%.2f s", secs);
  return {ok && secs < 10.0, det.str()};
}

// ---------------------------------------------------------------------------
// 6. Balanced arbiter fairness

Result balanced_fairness() {
  const std::uint32_t cores = 16;
  std::uint64_t selections = 0;
  std::uint64_t worst = 0;
  for (std::uint32_t slice = 0; slice < 8; ++slice) {
    ArbiterConfig acfg;
    acfg.policy = ArbiterPolicy::Balanced;
    Arbiter arb(acfg, cores, 3, 5);
    std::mt19937 rng(100 + slice);
    std::vector<MemRequest> q;
    std::vector<CoreId> order(cores);
    for (CoreId c = 0; c < cores; ++c) order[c] = c;
    std::shuffle(order.begin(), order.end(), rng);
    auto make = [&](CoreId c) {
      MemRequest r;
      r.core = c;
      r.line = 64 * (8 * (rng() % 4096) + slice);
      return r;
    };
    for (CoreId c : order) q.push_back(make(c));
    for (Cycle t = 0; t < 10000; ++t) {
      const std::size_t i = arb.select(q, {}, t);
      const CoreId c = q[i].core;
      q.erase(q.begin() + static_cast<std::ptrdiff_t>(i));
      q.push_back(make(c));
      const auto& s = arb.counters().served;
      const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      worst = std::max(worst, *hi - *lo);
      ++selections;
    }
  }
  return {worst <= 1, std::to_string(selections) + " selections on 8 slices, max counter spread " +
                          std::to_string(worst)};
}

// ---------------------------------------------------------------------------
// 7. sent_reqs residency

Result sent_reqs_timing() {
  SimConfig cfg = SimConfig::defaults();
  cfg.set("arbiter", "BMA");
  cfg.set("l2_size", "1MB");
  const std::uint32_t want = cfg.l2.hit_latency + cfg.l2.mshr_latency;
  Simulator sim(cfg, contended_traces(5, 15));
  struct Seen {
    Cycle first = 0;
    Cycle last = 0;
    Cycle issued = 0;
  };
  std::map<std::pair<std::uint32_t, Cycle>, Seen> seen;
  sim.set_observer([&](Cycle now, const Simulator& s) {
    for (const auto& sl : s.slices()) {
      for (const auto& e : sl.arbiter().sent_reqs().items()) {
        auto [it, fresh] = seen.try_emplace({sl.id(), e.issued}, Seen{now, now, e.issued});
        if (!fresh) it->second.last = now;
      }
    }
  });
  const StatsRecord st = sim.run();
  std::size_t bad = 0;
  for (const auto& [k, v] : seen) {
    if (v.first != v.issued || v.last - v.first + 1 != want) ++bad;
  }
  const bool all_seen = seen.size() == st.total(&SliceCounters::lookups);
  return {bad == 0 && all_seen && want == 8,
          std::to_string(seen.size()) + " elements, residency " + std::to_string(want) + " cycles, " +
              std::to_string(bad) + " deviations"};
}

// ---------------------------------------------------------------------------
// 8. Directional reproduction on the Logit workload

Result directional() {
  struct Run {
    std::uint64_t L;
    const char* l2;
    const char* throttle;
    const char* arbiter;
  };
  const Run runs[] = {
      {2048, "16MB", "none", "fcfs"},  {2048, "16MB", "dynmg", "fcfs"}, {2048, "16MB", "dynmg", "BMA"},
      {8192, "16MB", "none", "fcfs"},  {8192, "4MB", "none", "fcfs"},   {8192, "16MB", "dynmg", "BMA"},
      {8192, "4MB", "dynmg", "BMA"},
  };
  const auto t2k = logit_traces("llama3-70b", 2048);
  const auto t8k = logit_traces("llama3-70b", 8192);
  std::vector<std::future<std::pair<StatsRecord, double>>> futs;
  for (const auto& r : runs) {
    futs.push_back(std::async(std::launch::async, [&, r] {
      SimConfig cfg = SimConfig::defaults();
      cfg.set("mshr_num_entry", "6");
      cfg.set("l2_size", r.l2);
      cfg.set("throttle", r.throttle);
      cfg.set("arbiter", r.arbiter);
      const auto t0 = Clock::now();
      StatsRecord s = run(cfg, r.L == 2048 ? t2k : t8k);
      return std::pair{std::move(s), seconds_since(t0)};
    }));
  }
  std::vector<StatsRecord> st;
  double slowest = 0;
  for (auto& f : futs) {
    auto [s, secs] = f.get();
    st.push_back(std::move(s));
    slowest = std::max(slowest, secs);
  }
  auto cyc = [&](int i) { return static_cast<double>(st[static_cast<std::size_t>(i)].cycles); };
  auto hr = [&](int i) { return st[static_cast<std::size_t>(i)].derived.mshr_hit_rate; };
  const double margin = 0.02;
  const bool a = cyc(1) <= (1 - margin) * cyc(0);
  const bool b = cyc(2) <= (1 - margin) * cyc(1);
  const bool c = hr(0) < hr(1) && hr(1) < hr(2);
  const double deg_unopt = cyc(4) / cyc(3);
  const double deg_bma = cyc(6) / cyc(5);
  const bool d = deg_unopt >= (1 + margin) * deg_bma;
  std::ostringstream det;
  det << "(a) " << (a ? "ok" : "FAIL") << " dynmg " << st[1].cycles << " vs unoptimized " << st[0].cycles << " ("
      << fmt("%+.1f%%", 100 * (cyc(1) / cyc(0) - 1)) << "); "
      << "(b) " << (b ? "ok" : "FAIL") << " dynmg+BMA " << st[2].cycles << " ("
      << fmt("%+.1f%%", 100 * (cyc(2) / cyc(1) - 1)) << " vs dynmg); "
      << "(c) " << (c ? "ok" : "FAIL") << " MSHR hit rate " << fmt("%.3f", hr(0)) << " < " << fmt("%.3f", hr(1))
      << " < " << fmt("%.3f", hr(2)) << "; "
      << "(d) " << (d ? "ok" : "FAIL") << " 4MB/16MB at L=8192: unoptimized " << fmt("%.4f", deg_unopt)
      << ", dynmg+BMA " << fmt("%.4f", deg_bma) << ", ratio " << fmt("%.4f", deg_unopt / deg_bma)
      << " (needs >= 1.02); slowest run " << fmt("%.1f s", slowest);
  return {a && b && c && d && slowest <= 600, det.str()};
}

// ---------------------------------------------------------------------------
// 9. Determinism

Result determinism() {
  const auto traces = logit_traces("llama3-70b", 2048);
  SimConfig cfg = SimConfig::defaults();
  cfg.set("throttle", "dynmg");
  cfg.set("arbiter", "BMA");
  auto once = [&] {
    const StatsRecord s = run(cfg, traces);
    std::string csv;
    for (const auto& v : csv_metric_values(s)) csv += v + ",";
    return std::pair{dump_json(s), csv};
  };
  const auto first = once();
  // Concurrent instances must not disturb each other.
  auto f1 = std::async(std::launch::async, once);
  auto f2 = std::async(std::launch::async, once);
  const auto second = f1.get();
  const auto third = f2.get();
  const bool same = first == second && first == third;
  return {same, "3 runs (2 concurrent), JSON " + std::to_string(first.first.size()) + " bytes, " +
                    (same ? "byte-identical" : "differs")};
}

// ---------------------------------------------------------------------------
// 10. Trace generator coverage

Result generator_coverage() {
  std::ostringstream det;
  bool ok = true;
  const std::pair<const char*, std::uint64_t> shapes[] = {{"llama3-70b", 8192}, {"llama3-405b", 16384}};
  for (const auto& [model, L] : shapes) {
    const OperatorShape shape = model_preset(model, L);
    const LogitLayouts lay = default_layouts(shape);
    const MappingSpec m = build_logit_mapping(shape, 16, 1);
    const auto traces = generate_traces(shape, m, lay, {16, 64, kVectorElems});
    std::set<Addr> lines;
    std::map<Addr, std::uint32_t> writes;
    std::set<Addr> reads;
    for (const auto& ct : traces) {
      for (const auto& tb : ct) {
        for (const auto& op : tb.ops) {
          if (op.kind == OpKind::Compute) continue;
          lines.insert(op.addr);
          if (op.kind == OpKind::Write) ++writes[op.addr];
          else reads.insert(op.addr);
        }
      }
    }
    const Footprint fp = footprint(shape, lay);
    // Independent line counts from the shape alone.
    const std::uint64_t q_lines = shape.H * shape.G * shape.D * shape.elem_bytes / 64;
    const std::uint64_t k_lines = shape.H * shape.L * shape.D * shape.elem_bytes / 64;
    const std::uint64_t out_lines = shape.H * shape.G * shape.L * shape.elem_bytes / 64;
    const bool once = std::all_of(writes.begin(), writes.end(), [](const auto& kv) { return kv.second == 1; });
    const bool match = lines.size() == fp.unique_lines && fp.unique_lines == q_lines + k_lines + out_lines &&
                       reads.size() == q_lines + k_lines && writes.size() == out_lines &&
                       fp.out_bytes == out_lines * 64;
    ok = ok && once && match;
    det << model << " L=" << L << ": " << lines.size() << " unique lines (footprint " << fp.unique_lines << "), "
        << writes.size() << " output lines " << (once ? "each written once" : "NOT written exactly once") << "; ";
  }
  return {ok, det.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "throttle state machine", throttle_state_machine},
      {2, "MSHR bounds", mshr_bounds},
      {3, "functional cache oracle", functional_oracle},
      {4, "policy metamorphic", policy_metamorphic},
      {5, "entry-limited miss throughput", littles_law},
      {6, "balanced arbiter fairness", balanced_fairness},
      {7, "sent_reqs timing", sent_reqs_timing},
      {8, "directional reproduction", directional},
      {9, "determinism", determinism},
      {10, "trace generator coverage", generator_coverage},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Result r;
    try {
      r = c.fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << r.detail << std::endl;
    if (!r.pass) ++failed;
  }
  return failed ? 1 : 0;
}
