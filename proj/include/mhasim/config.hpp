#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "mhasim/types.hpp"

namespace mhasim {

enum class AllocPolicy : std::uint8_t { OnFill, OnMiss };
enum class WritePolicy : std::uint8_t { Through, Back };

struct CacheConfig {
  std::uint64_t size_bytes = 0;
  std::uint32_t associativity = 8;
  std::uint32_t line_size = 64;
  std::uint32_t hit_latency = 1;
  std::uint32_t data_latency = 0;
  std::uint32_t mshr_num_entry = 0;
  std::uint32_t mshr_num_target = 0;
  std::uint32_t mshr_latency = 0;
  AllocPolicy alloc = AllocPolicy::OnFill;
  WritePolicy write = WritePolicy::Back;
  bool write_allocate = true;
  std::uint32_t req_q_size = 1;
  std::uint32_t resp_q_size = 1;

  std::uint64_t num_sets() const { return size_bytes / (std::uint64_t{associativity} * line_size); }
  void validate(std::string_view what) const;
};

struct CoreConfig {
  std::uint32_t inst_window_depth = 128;
  std::uint32_t num_inst_windows = 4;
  bool steal = true;
};

enum class ArbiterPolicy : std::uint8_t { Fcfs, Balanced, MshrAware, BalancedMshrAware };
enum class RespArbitration : std::uint8_t { ResponseFirst, RequestFirst };

struct ArbiterConfig {
  ArbiterPolicy policy = ArbiterPolicy::Fcfs;
  RespArbitration resp_arbitration = RespArbitration::ResponseFirst;
  std::uint32_t hit_buffer_size = 16;
};

enum class ThrottleMode : std::uint8_t { None, Dyncta, Dynmg };
enum class TcsAggregate : std::uint8_t { Mean, Max };

struct ThrottleConfig {
  ThrottleMode mode = ThrottleMode::None;
  std::uint32_t sampling_period = 2000;
  std::uint32_t sub_period = 400;
  std::uint32_t max_gear = 4;
  double tcs_normal = 0.1;   // lower bound of Normal
  double tcs_high = 0.2;     // lower bound of High
  double tcs_extreme = 0.375;  // lower bound of Extremely High
  TcsAggregate aggregate = TcsAggregate::Mean;
  std::uint32_t cmem_upper = 250;
  std::uint32_t cmem_lower = 180;
  std::uint32_t cidle_upper = 4;
  bool reset_on_unthrottle = true;
};

enum class DramMode : std::uint8_t { FrFcfs, Simple };

/// DDR5-3200 (tCK = 0.625 ns) converted to a 1.96 GHz core clock as
/// ceil(ns * 1.96): tRCD = tRP = tCL = 16.25 ns -> 32 cycles; one 64 B burst
/// per channel every 2.5 ns -> 5 cycles.
struct DramConfig {
  DramMode mode = DramMode::FrFcfs;
  std::uint32_t num_channels = 4;
  std::uint32_t ranks_per_channel = 4;
  std::uint32_t banks_per_rank = 16;
  std::uint32_t row_size = 2048;
  std::uint32_t t_rcd = 32;
  std::uint32_t t_rp = 32;
  std::uint32_t t_cas = 32;
  std::uint32_t t_burst = 5;
  std::uint32_t queue_depth = 64;
  bool bank_permute = true;
  std::uint32_t simple_latency = 100;
  std::uint32_t simple_max_outstanding = 64;
};

struct SimConfig {
  double frequency_hz = 1.96e9;
  std::uint32_t num_cores = 16;
  std::uint32_t num_slices = 8;
  std::uint32_t line_size = 64;
  std::uint32_t interconnect_latency = 10;
  CoreConfig core;
  CacheConfig l1;
  CacheConfig l2;  // whole L2; each slice holds num_sets / num_slices sets
  ArbiterConfig arbiter;
  ThrottleConfig throttle;
  DramConfig dram;
  std::uint64_t seed = 1;
  std::uint64_t deadlock_threshold = 1'000'000;

  /// Defaults reproduce the simulated system configuration table:
  /// 16 cores, 16 MB / 8-slice L2, 64 KB L1, MSHR 6 x 8 per slice.
  static SimConfig defaults();

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  /// Applies one key=value setting; unknown keys throw ConfigError.
  void set(std::string_view key, std::string_view value);
  std::map<std::string, std::string> to_map() const;
};

SimConfig parse_config(std::string_view text, SimConfig base = SimConfig::defaults());
SimConfig read_config_file(const std::string& path);
std::string format_config(const SimConfig& cfg);

const char* to_string(ArbiterPolicy p);
const char* to_string(ThrottleMode m);
ArbiterPolicy parse_arbiter(std::string_view s);
ThrottleMode parse_throttle(std::string_view s);

}  // namespace mhasim
