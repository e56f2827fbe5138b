#include "mhasim/engine.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mhasim {

namespace fs = std::filesystem;

namespace {

void check_block(const ThreadBlock& tb, CoreId core, std::uint32_t line_size) {
  for (std::size_t i = 0; i < tb.ops.size(); ++i) {
    const TraceOp& op = tb.ops[i];
    const bool bad = op.kind == OpKind::Compute ? op.bubble_cycles == 0 : op.addr % line_size != 0;
    if (bad) {
      throw TraceError("core " + std::to_string(core) + " block " + std::to_string(tb.tb_id) + " op " +
                       std::to_string(i) + ": " +
                       (op.kind == OpKind::Compute ? "zero-cycle bubble" : "address not aligned to the line size"));
    }
  }
}

}  // namespace

std::uint32_t slice_for(Addr line, const SimConfig& cfg) {
  const std::uint64_t set = (line / cfg.line_size) % cfg.l2.num_sets();
  return static_cast<std::uint32_t>(set % cfg.num_slices);
}

Simulator::Simulator(const SimConfig& cfg, std::vector<CoreTrace> traces)
    : cfg_(cfg), dram_(cfg.dram, cfg.line_size), throttle_(cfg.throttle, cfg.num_cores) {
  cfg_.validate();
  if (traces.size() > cfg_.num_cores) {
    throw TraceError("trace set has " + std::to_string(traces.size()) + " cores but the config has " +
                     std::to_string(cfg_.num_cores));
  }
  cores_.reserve(cfg_.num_cores);
  for (CoreId c = 0; c < cfg_.num_cores; ++c) {
    cores_.emplace_back(c, cfg_);
    if (c < traces.size()) {
      for (auto& tb : traces[c]) {
        check_block(tb, c, cfg_.line_size);
        cores_.back().enqueue_block(std::move(tb));
      }
    }
    if (cfg_.throttle.mode == ThrottleMode::Dyncta) cores_.back().set_throttled(true, false);
  }
  slices_.reserve(cfg_.num_slices);
  for (std::uint32_t s = 0; s < cfg_.num_slices; ++s) {
    slices_.emplace_back(cfg_, s);
    req_wires_.emplace_back(cfg_.interconnect_latency);
  }
  for (CoreId c = 0; c < cfg_.num_cores; ++c) resp_wires_.emplace_back(cfg_.interconnect_latency);
  stalls_at_sample_.assign(cfg_.num_slices, 0);
}

void Simulator::record_completions(std::vector<Completion>* log) {
  for (auto& c : cores_) c.set_completion_log(log);
}

void Simulator::record_issues(std::vector<IssueRecord>* log) {
  for (auto& c : cores_) c.set_issue_log(log);
}

void Simulator::record_lookups(std::vector<LookupRecord>* log) {
  for (auto& s : slices_) s.set_lookup_log(log);
}

bool Simulator::drained() const {
  for (const auto& c : cores_) {
    if (!c.out_of_work()) return false;
  }
  for (const auto& w : req_wires_) {
    if (!w.empty()) return false;
  }
  for (const auto& w : resp_wires_) {
    if (!w.empty()) return false;
  }
  for (const auto& s : slices_) {
    if (!s.idle()) return false;
  }
  return dram_.idle();
}

void Simulator::throttle_phase() {
  const auto& t = cfg_.throttle;
  if (now_ == 0) return;
  // In-core update first, then the new gear and throttled set.
  if (now_ % t.sub_period == 0) {
    for (auto& c : cores_) c.end_sub_period(t);
  }
  if (t.mode != ThrottleMode::Dynmg || now_ % t.sampling_period != 0) return;

  std::vector<std::uint64_t> stalls(slices_.size());
  for (std::size_t s = 0; s < slices_.size(); ++s) {
    const auto total = slices_[s].counters().stall_cycles;
    stalls[s] = total - stalls_at_sample_[s];
    stalls_at_sample_[s] = total;
  }
  std::vector<std::uint64_t> progress(cores_.size(), 0);
  for (const auto& s : slices_) {
    const auto& served = s.arbiter().counters().served;
    for (std::size_t c = 0; c < progress.size(); ++c) progress[c] += served[c];
  }
  throttle_.sample(stalls, progress);
  for (std::size_t c = 0; c < cores_.size(); ++c) {
    cores_[c].set_throttled(throttle_.throttled()[c], t.reset_on_unthrottle);
  }
}

std::uint64_t Simulator::activity() const {
  std::uint64_t a = wire_moves_;
  for (const auto& c : cores_) {
    const auto& k = c.counters();
    a += k.ops_issued + k.bubbles + k.responses + k.steals_in;
  }
  for (const auto& s : slices_) {
    const auto& k = s.counters();
    a += k.lookups + k.fills + k.mshr_allocs + k.mshr_merges;
  }
  const auto& d = dram_.counters();
  return a + d.reads + d.writes + d.row_hits + d.row_misses;
}

bool Simulator::step() {
  if (done_) return false;
  if (now_ == 0 && drained()) {
    done_ = true;
    return false;
  }

  throttle_phase();

  if (cfg_.core.steal) steal_thread_blocks(cores_);
  issued_buf_.clear();
  for (auto& c : cores_) {
    c.assign_thread_blocks();
    c.tick(now_, next_request_id_, issued_buf_);
  }
  for (const auto& r : issued_buf_) req_wires_[slice_for(r.line, cfg_)].push(now_, r);

  for (std::size_t s = 0; s < slices_.size(); ++s) {
    auto& w = req_wires_[s];
    while (w.ready(now_) && slices_[s].can_accept()) {
      MemRequest r = w.pop();
      r.arrived = now_;
      slices_[s].accept(r);
      ++wire_moves_;
    }
  }

  auto drain_slice_out = [&] {
    for (const auto& r : slice_out_.responses) resp_wires_[r.core].push(now_, r);
    for (const auto& d : slice_out_.dram) dram_.enqueue(now_, d);
    slice_out_.responses.clear();
    slice_out_.dram.clear();
  };
  for (auto& s : slices_) {
    s.tick(now_, slice_out_);
    drain_slice_out();
  }

  dram_done_.clear();
  dram_.tick(now_, dram_done_);
  for (const auto& d : dram_done_) {
    if (d.is_write) continue;  // write-back acknowledged
    slices_[d.slice].dram_response(now_, d.line, slice_out_);
    drain_slice_out();
  }

  for (std::size_t c = 0; c < cores_.size(); ++c) {
    auto& w = resp_wires_[c];
    while (w.ready(now_)) {
      cores_[c].on_response(now_, w.pop());
      ++wire_moves_;
    }
  }

  if (observer_) observer_(now_, *this);

  if (drained()) {
    total_cycles_ = now_ + 1;
    done_ = true;
  } else {
    const auto a = activity();
    if (a == last_activity_) {
      if (++quiet_cycles_ >= cfg_.deadlock_threshold) {
        throw DeadlockError("no progress for " + std::to_string(quiet_cycles_) + " cycles at cycle " +
                            std::to_string(now_) + "\n" + state_dump());
      }
    } else {
      quiet_cycles_ = 0;
      last_activity_ = a;
    }
  }
  ++now_;
  return !done_;
}

StatsRecord Simulator::run() {
  while (step()) {
  }
  return stats();
}

StatsRecord Simulator::stats() const {
  StatsRecord s;
  s.config = cfg_.to_map();
  s.cycles = total_cycles_;
  s.frequency_hz = cfg_.frequency_hz;
  s.line_size = cfg_.line_size;
  s.mshr_num_entry = cfg_.l2.mshr_num_entry;
  s.progress.assign(cores_.size(), 0);
  for (const auto& sl : slices_) {
    s.slices.push_back({sl.counters(), sl.arbiter().inferred_hits_issued, sl.arbiter().inferred_mshr_issued});
    const auto& served = sl.arbiter().counters().served;
    for (std::size_t c = 0; c < cores_.size(); ++c) s.progress[c] += served[c];
  }
  for (const auto& c : cores_) s.cores.push_back(c.counters());
  s.dram = dram_.counters();
  s.tcs_series = throttle_.tcs_series();
  s.gear_trace = throttle_.gear_trace();
  finalize(s);
  return s;
}

std::string Simulator::state_dump() const {
  std::ostringstream os;
  os << "cycle " << now_ << '\n';
  for (const auto& c : cores_) {
    os << "core " << c.id() << ": pending=" << c.pending_count() << " max_tb=" << c.max_tb() << " windows=[";
    for (std::size_t w = 0; w < c.windows().size(); ++w) {
      const auto& win = c.windows()[w];
      if (w) os << ' ';
      if (!win.tb) os << '-';
      else os << "tb" << win.tb->tb_id << '@' << win.cursor << '/' << win.tb->ops.size() << " out=" << win.outstanding;
    }
    os << "] resp_wire=" << resp_wires_[c.id()].size() << '\n';
  }
  for (const auto& s : slices_) {
    os << "slice " << s.id() << ": req_q=" << s.request_queue().size() << " resp_q=" << s.response_queue_size()
       << " mshr=" << s.mshr().size() << " stalled=" << s.stalled() << " req_wire=" << req_wires_[s.id()].size()
       << '\n';
  }
  os << "dram idle=" << dram_.idle() << '\n';
  return os.str();
}

StatsRecord run(const SimConfig& cfg, std::vector<CoreTrace> traces) {
  Simulator sim(cfg, std::move(traces));
  return sim.run();
}

void write_trace_set(const std::string& dir, const std::vector<CoreTrace>& cores, nlohmann::json manifest) {
  fs::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t c = 0; c < cores.size(); ++c) {
    const std::string name = "core_" + std::to_string(c) + ".trace";
    write_trace_file((fs::path(dir) / name).string(), cores[c]);
    files.push_back(name);
  }
  manifest["num_cores"] = cores.size();
  manifest["files"] = files;
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw TraceError("cannot write manifest in '" + dir + "'");
  out << manifest.dump(2) << '\n';
}

TraceSet read_trace_set(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw TraceError("no manifest.json in '" + dir + "'");
  TraceSet ts;
  try {
    ts.manifest = nlohmann::json::parse(in);
    const auto& files = ts.manifest.at("files");
    for (std::size_t c = 0; c < files.size(); ++c) {
      ts.cores.push_back(read_trace_file((fs::path(dir) / files[c].get<std::string>()).string(), static_cast<CoreId>(c)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw TraceError("bad manifest '" + mpath.string() + "': " + e.what());
  }
  return ts;
}

}  // namespace mhasim
