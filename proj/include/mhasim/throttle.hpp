#pragma once

// Global multi-gear throttle: classifies slice stall pressure once per
// sampling period, moves the gear, and picks which cores run the in-core
// controller.

#include <cstdint>
#include <span>
#include <vector>

#include "mhasim/config.hpp"
#include "mhasim/types.hpp"

namespace mhasim {

enum class Contention : std::uint8_t { Low, Normal, High, ExtremelyHigh };
const char* to_string(Contention c);

/// Throws std::out_of_range unless 0 <= tcs <= 1.
Contention classify_contention(double tcs, const ThrottleConfig& cfg = {});

struct GearState {
  std::uint32_t gear = 0;
  std::uint32_t max_gear = 4;
  bool operator==(const GearState&) const = default;
};

GearState step_gear(GearState s, Contention c);

/// Throttled share of the cores at each gear, in eighths: 0, 1, 2, 4, 6.
std::uint32_t gear_eighths(std::uint32_t gear);
std::size_t throttled_count(std::uint32_t gear, std::size_t num_cores);

/// Cores with the largest progress sums, ties to the lower id; returned in
/// ascending id order.
std::vector<CoreId> select_throttled(std::uint32_t gear, std::span<const std::uint64_t> progress);

class GlobalThrottle {
 public:
  GlobalThrottle(const ThrottleConfig& cfg, std::uint32_t num_cores);

  /// One sampling boundary. `slice_stalls` holds each slice's stall cycles
  /// during the period just ended; `progress` the cumulative per-core sums.
  void sample(std::span<const std::uint64_t> slice_stalls, std::span<const std::uint64_t> progress);

  double stall_fraction(std::span<const std::uint64_t> slice_stalls) const;
  std::uint32_t gear() const { return state_.gear; }
  const std::vector<bool>& throttled() const { return throttled_; }
  const std::vector<double>& tcs_series() const { return tcs_series_; }
  const std::vector<std::uint32_t>& gear_trace() const { return gear_trace_; }

 private:
  ThrottleConfig cfg_;
  GearState state_;
  std::vector<bool> throttled_;
  std::vector<double> tcs_series_;
  std::vector<std::uint32_t> gear_trace_;
};

}  // namespace mhasim
