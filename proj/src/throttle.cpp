#include "mhasim/throttle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mhasim {

const char* to_string(Contention c) {
  switch (c) {
    case Contention::Low: return "low";
    case Contention::Normal: return "normal";
    case Contention::High: return "high";
    case Contention::ExtremelyHigh: return "extremely_high";
  }
  return "?";
}

Contention classify_contention(double tcs, const ThrottleConfig& cfg) {
  if (!(tcs >= 0.0 && tcs <= 1.0)) throw std::out_of_range("stall fraction outside [0, 1]: " + std::to_string(tcs));
  if (tcs < cfg.tcs_normal) return Contention::Low;
  if (tcs < cfg.tcs_high) return Contention::Normal;
  if (tcs < cfg.tcs_extreme) return Contention::High;
  return Contention::ExtremelyHigh;
}

GearState step_gear(GearState s, Contention c) {
  switch (c) {
    case Contention::High:
      if (s.gear < s.max_gear) ++s.gear;
      break;
    case Contention::Low:
      if (s.gear > 0) --s.gear;
      break;
    case Contention::ExtremelyHigh:
      s.gear = s.gear + 2 <= s.max_gear ? s.gear + 2 : s.max_gear;
      break;
    case Contention::Normal:
      break;
  }
  return s;
}

std::uint32_t gear_eighths(std::uint32_t gear) {
  static constexpr std::uint32_t table[] = {0, 1, 2, 4, 6};
  if (gear > 4) throw std::out_of_range("gear above 4");
  return table[gear];
}

std::size_t throttled_count(std::uint32_t gear, std::size_t num_cores) {
  return num_cores * gear_eighths(gear) / 8;
}

std::vector<CoreId> select_throttled(std::uint32_t gear, std::span<const std::uint64_t> progress) {
  std::vector<CoreId> order(progress.size());
  std::iota(order.begin(), order.end(), CoreId{0});
  std::stable_sort(order.begin(), order.end(), [&](CoreId a, CoreId b) { return progress[a] > progress[b]; });
  order.resize(throttled_count(gear, progress.size()));
  std::sort(order.begin(), order.end());
  return order;
}

GlobalThrottle::GlobalThrottle(const ThrottleConfig& cfg, std::uint32_t num_cores)
    : cfg_(cfg), state_{0, cfg.max_gear}, throttled_(num_cores, false) {}

double GlobalThrottle::stall_fraction(std::span<const std::uint64_t> slice_stalls) const {
  if (slice_stalls.empty()) return 0.0;
  const double period = cfg_.sampling_period;
  if (cfg_.aggregate == TcsAggregate::Max) {
    return static_cast<double>(*std::max_element(slice_stalls.begin(), slice_stalls.end())) / period;
  }
  const auto total = std::accumulate(slice_stalls.begin(), slice_stalls.end(), std::uint64_t{0});
  return static_cast<double>(total) / (period * static_cast<double>(slice_stalls.size()));
}

void GlobalThrottle::sample(std::span<const std::uint64_t> slice_stalls, std::span<const std::uint64_t> progress) {
  const double tcs = std::min(1.0, stall_fraction(slice_stalls));
  state_ = step_gear(state_, classify_contention(tcs, cfg_));
  std::fill(throttled_.begin(), throttled_.end(), false);
  for (CoreId c : select_throttled(state_.gear, progress)) throttled_[c] = true;
  tcs_series_.push_back(tcs);
  gear_trace_.push_back(state_.gear);
}

}  // namespace mhasim
