#include "mhasim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace mhasim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  // Accept size suffixes for readability in sweeps: 16MB, 64KB.
  std::uint64_t mult = 1;
  if (v.size() > 2 && (v.substr(v.size() - 2) == "KB" || v.substr(v.size() - 2) == "kB")) {
    mult = 1024;
    v.remove_suffix(2);
  } else if (v.size() > 2 && v.substr(v.size() - 2) == "MB") {
    mult = 1024 * 1024;
    v.remove_suffix(2);
  }
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected unsigned integer, got '" + std::string(v) + "'");
  }
  out *= mult;
  if (out > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
    throw ConfigError("config key '" + std::string(key) + "': value out of range");
  }
  return static_cast<T>(out);
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || !std::isfinite(d)) {
    throw ConfigError("config key '" + std::string(key) + "': expected number, got '" + s + "'");
  }
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" + std::string(v) + "'");
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

struct Key {
  const char* name;
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<std::string(const SimConfig&)> get;
};

#define MHASIM_UINT_KEY(name, field)                                                          \
  Key {                                                                                       \
    name, [](SimConfig& c, std::string_view v) { c.field = parse_uint<decltype(c.field)>(name, v); }, \
        [](const SimConfig& c) { return std::to_string(c.field); }                            \
  }
#define MHASIM_BOOL_KEY(name, field)                                              \
  Key {                                                                           \
    name, [](SimConfig& c, std::string_view v) { c.field = parse_bool(name, v); }, \
        [](const SimConfig& c) { return std::string(c.field ? "true" : "false"); } \
  }
#define MHASIM_DOUBLE_KEY(name, field)                                              \
  Key {                                                                             \
    name, [](SimConfig& c, std::string_view v) { c.field = parse_double(name, v); }, \
        [](const SimConfig& c) { return fmt_double(c.field); }                      \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      MHASIM_DOUBLE_KEY("frequency_hz", frequency_hz),
      MHASIM_UINT_KEY("num_cores", num_cores),
      MHASIM_UINT_KEY("num_slices", num_slices),
      MHASIM_UINT_KEY("line_size", line_size),
      MHASIM_UINT_KEY("interconnect_latency", interconnect_latency),
      MHASIM_UINT_KEY("inst_window_depth", core.inst_window_depth),
      MHASIM_UINT_KEY("num_inst_windows", core.num_inst_windows),
      MHASIM_BOOL_KEY("steal", core.steal),
      MHASIM_UINT_KEY("l1_size", l1.size_bytes),
      MHASIM_UINT_KEY("l1_assoc", l1.associativity),
      MHASIM_UINT_KEY("l1_latency", l1.hit_latency),
      MHASIM_UINT_KEY("l2_size", l2.size_bytes),
      MHASIM_UINT_KEY("l2_assoc", l2.associativity),
      MHASIM_UINT_KEY("l2_hit_latency", l2.hit_latency),
      MHASIM_UINT_KEY("l2_data_latency", l2.data_latency),
      MHASIM_UINT_KEY("mshr_num_entry", l2.mshr_num_entry),
      MHASIM_UINT_KEY("mshr_num_target", l2.mshr_num_target),
      MHASIM_UINT_KEY("mshr_latency", l2.mshr_latency),
      MHASIM_UINT_KEY("req_q_size", l2.req_q_size),
      MHASIM_UINT_KEY("resp_q_size", l2.resp_q_size),
      Key{"arbiter", [](SimConfig& c, std::string_view v) { c.arbiter.policy = parse_arbiter(v); },
          [](const SimConfig& c) { return std::string(to_string(c.arbiter.policy)); }},
      Key{"rr_arbitration",
          [](SimConfig& c, std::string_view v) {
            if (v == "response_first") c.arbiter.resp_arbitration = RespArbitration::ResponseFirst;
            else if (v == "request_first") c.arbiter.resp_arbitration = RespArbitration::RequestFirst;
            else throw ConfigError("rr_arbitration must be response_first or request_first");
          },
          [](const SimConfig& c) {
            return std::string(c.arbiter.resp_arbitration == RespArbitration::ResponseFirst ? "response_first"
                                                                                             : "request_first");
          }},
      MHASIM_UINT_KEY("hit_buffer_size", arbiter.hit_buffer_size),
      Key{"throttle", [](SimConfig& c, std::string_view v) { c.throttle.mode = parse_throttle(v); },
          [](const SimConfig& c) { return std::string(to_string(c.throttle.mode)); }},
      MHASIM_UINT_KEY("sampling_period", throttle.sampling_period),
      MHASIM_UINT_KEY("sub_period", throttle.sub_period),
      MHASIM_UINT_KEY("max_gear", throttle.max_gear),
      MHASIM_DOUBLE_KEY("tcs_normal", throttle.tcs_normal),
      MHASIM_DOUBLE_KEY("tcs_high", throttle.tcs_high),
      MHASIM_DOUBLE_KEY("tcs_extreme", throttle.tcs_extreme),
      Key{"tcs_aggregate",
          [](SimConfig& c, std::string_view v) {
            if (v == "mean") c.throttle.aggregate = TcsAggregate::Mean;
            else if (v == "max") c.throttle.aggregate = TcsAggregate::Max;
            else throw ConfigError("tcs_aggregate must be mean or max");
          },
          [](const SimConfig& c) { return std::string(c.throttle.aggregate == TcsAggregate::Mean ? "mean" : "max"); }},
      MHASIM_UINT_KEY("cmem_upper", throttle.cmem_upper),
      MHASIM_UINT_KEY("cmem_lower", throttle.cmem_lower),
      MHASIM_UINT_KEY("cidle_upper", throttle.cidle_upper),
      MHASIM_BOOL_KEY("reset_on_unthrottle", throttle.reset_on_unthrottle),
      Key{"dram_mode",
          [](SimConfig& c, std::string_view v) {
            if (v == "frfcfs") c.dram.mode = DramMode::FrFcfs;
            else if (v == "simple") c.dram.mode = DramMode::Simple;
            else throw ConfigError("dram_mode must be frfcfs or simple");
          },
          [](const SimConfig& c) { return std::string(c.dram.mode == DramMode::FrFcfs ? "frfcfs" : "simple"); }},
      MHASIM_UINT_KEY("dram_channels", dram.num_channels),
      MHASIM_UINT_KEY("dram_ranks", dram.ranks_per_channel),
      MHASIM_UINT_KEY("dram_banks", dram.banks_per_rank),
      MHASIM_UINT_KEY("dram_row_size", dram.row_size),
      MHASIM_UINT_KEY("t_rcd", dram.t_rcd),
      MHASIM_UINT_KEY("t_rp", dram.t_rp),
      MHASIM_UINT_KEY("t_cas", dram.t_cas),
      MHASIM_UINT_KEY("t_burst", dram.t_burst),
      MHASIM_BOOL_KEY("dram_bank_permute", dram.bank_permute),
      MHASIM_UINT_KEY("dram_queue_depth", dram.queue_depth),
      MHASIM_UINT_KEY("dram_simple_latency", dram.simple_latency),
      MHASIM_UINT_KEY("dram_simple_max_outstanding", dram.simple_max_outstanding),
      MHASIM_UINT_KEY("seed", seed),
      MHASIM_UINT_KEY("deadlock_threshold", deadlock_threshold),
  };
  return k;
}

#undef MHASIM_UINT_KEY
#undef MHASIM_BOOL_KEY
#undef MHASIM_DOUBLE_KEY

bool is_pow2(std::uint64_t v) { return v && !(v & (v - 1)); }

}  // namespace

void CacheConfig::validate(std::string_view what) const {
  const std::string w(what);
  if (line_size == 0 || associativity == 0) throw ConfigError(w + ": line size and associativity must be >= 1");
  if (size_bytes == 0 || size_bytes % (std::uint64_t{associativity} * line_size) != 0) {
    throw ConfigError(w + ": size must be a nonzero multiple of associativity * line size");
  }
  if (req_q_size == 0 || resp_q_size == 0) throw ConfigError(w + ": queue sizes must be >= 1");
  if (hit_latency == 0) throw ConfigError(w + ": hit latency must be >= 1");
}

SimConfig SimConfig::defaults() {
  SimConfig c;
  c.l1.size_bytes = 64 * 1024;
  c.l1.associativity = 8;
  c.l1.line_size = 64;
  c.l1.hit_latency = 1;
  c.l1.alloc = AllocPolicy::OnFill;
  c.l1.write = WritePolicy::Through;
  c.l1.write_allocate = false;
  c.l1.req_q_size = 1;
  c.l1.resp_q_size = 1;

  c.l2.size_bytes = 16ull * 1024 * 1024;
  c.l2.associativity = 8;
  c.l2.line_size = 64;
  c.l2.hit_latency = 3;
  c.l2.data_latency = 25;
  c.l2.mshr_num_entry = 6;
  c.l2.mshr_num_target = 8;
  c.l2.mshr_latency = 5;
  c.l2.alloc = AllocPolicy::OnFill;
  c.l2.write = WritePolicy::Back;
  c.l2.write_allocate = true;
  c.l2.req_q_size = 12;
  c.l2.resp_q_size = 64;
  return c;
}

void SimConfig::validate() const {
  if (!(frequency_hz > 0)) throw ConfigError("frequency_hz must be positive");
  if (num_cores == 0) throw ConfigError("num_cores must be >= 1");
  if (num_slices == 0) throw ConfigError("num_slices must be >= 1");
  if (line_size == 0 || !is_pow2(line_size)) throw ConfigError("line_size must be a power of two");
  if (interconnect_latency == 0) throw ConfigError("interconnect_latency must be >= 1");
  if (l1.line_size != line_size || l2.line_size != line_size) throw ConfigError("cache line sizes must equal line_size");
  l1.validate("l1");
  l2.validate("l2");
  if (l2.num_sets() % num_slices != 0) throw ConfigError("num_slices must divide the L2 set count");
  if (l2.mshr_num_entry == 0 || l2.mshr_num_target == 0) throw ConfigError("L2 MSHR dimensions must be >= 1");
  if (l2.mshr_latency == 0 || l2.data_latency == 0) throw ConfigError("L2 latencies must be >= 1");
  if (core.inst_window_depth == 0 || core.num_inst_windows == 0) {
    throw ConfigError("instruction window depth and count must be >= 1");
  }
  if (arbiter.hit_buffer_size == 0) throw ConfigError("hit_buffer_size must be >= 1");
  if (throttle.sampling_period == 0 || throttle.sub_period == 0) throw ConfigError("throttle periods must be >= 1");
  if (throttle.sampling_period % throttle.sub_period != 0) {
    throw ConfigError("sampling_period must be a multiple of sub_period");
  }
  if (throttle.max_gear > 4) throw ConfigError("max_gear must be <= 4");
  if (!(0 < throttle.tcs_normal && throttle.tcs_normal < throttle.tcs_high && throttle.tcs_high < throttle.tcs_extreme &&
        throttle.tcs_extreme <= 1)) {
    throw ConfigError("contention thresholds must satisfy 0 < normal < high < extreme <= 1");
  }
  if (throttle.cmem_lower > throttle.cmem_upper) throw ConfigError("cmem_lower must not exceed cmem_upper");
  if (!is_pow2(dram.num_channels)) throw ConfigError("dram_channels must be a power of two");
  if (!is_pow2(dram.ranks_per_channel) || !is_pow2(dram.banks_per_rank)) {
    throw ConfigError("dram_ranks and dram_banks must be powers of two");
  }
  if (dram.row_size < line_size || dram.row_size % line_size != 0 || !is_pow2(dram.row_size / line_size)) {
    throw ConfigError("dram_row_size must be a power-of-two multiple of line_size");
  }
  if (dram.t_rcd == 0 || dram.t_rp == 0 || dram.t_cas == 0 || dram.t_burst == 0 || dram.simple_latency == 0) {
    throw ConfigError("DRAM timings must be >= 1");
  }
  if (dram.queue_depth == 0 || dram.simple_max_outstanding == 0) throw ConfigError("DRAM queue sizes must be >= 1");
  if (deadlock_threshold == 0) throw ConfigError("deadlock_threshold must be >= 1");
}

void SimConfig::set(std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::map<std::string, std::string> SimConfig::to_map() const {
  std::map<std::string, std::string> m;
  for (const auto& k : keys()) m.emplace(k.name, k.get(*this));
  return m;
}

SimConfig parse_config(std::string_view text, SimConfig base) {
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

SimConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_config(const SimConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : cfg.to_map()) os << k << '=' << v << '\n';
  return os.str();
}

const char* to_string(ArbiterPolicy p) {
  switch (p) {
    case ArbiterPolicy::Fcfs: return "fcfs";
    case ArbiterPolicy::Balanced: return "B";
    case ArbiterPolicy::MshrAware: return "MA";
    case ArbiterPolicy::BalancedMshrAware: return "BMA";
  }
  return "?";
}

const char* to_string(ThrottleMode m) {
  switch (m) {
    case ThrottleMode::None: return "none";
    case ThrottleMode::Dyncta: return "dyncta";
    case ThrottleMode::Dynmg: return "dynmg";
  }
  return "?";
}

ArbiterPolicy parse_arbiter(std::string_view s) {
  if (s == "fcfs") return ArbiterPolicy::Fcfs;
  if (s == "B") return ArbiterPolicy::Balanced;
  if (s == "MA") return ArbiterPolicy::MshrAware;
  if (s == "BMA") return ArbiterPolicy::BalancedMshrAware;
  throw ConfigError("arbiter must be one of fcfs, B, MA, BMA (got '" + std::string(s) + "')");
}

ThrottleMode parse_throttle(std::string_view s) {
  if (s == "none") return ThrottleMode::None;
  if (s == "dyncta") return ThrottleMode::Dyncta;
  if (s == "dynmg") return ThrottleMode::Dynmg;
  if (s.find('+') != std::string_view::npos) {
    throw ConfigError("throttle modes are exclusive; '" + std::string(s) + "' combines several");
  }
  throw ConfigError("throttle must be one of none, dyncta, dynmg (got '" + std::string(s) + "')");
}

}  // namespace mhasim
