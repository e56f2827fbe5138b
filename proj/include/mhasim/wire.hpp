#pragma once

#include <cstdint>
#include <deque>
#include <utility>

#include "mhasim/types.hpp"

namespace mhasim {

/// Fixed-latency FIFO channel. An item pushed at cycle t becomes visible at
/// t + latency; items leave in push order.
template <class T>
class Wire {
 public:
  explicit Wire(std::uint32_t latency = 1) : latency_(latency) {}

  void push(Cycle now, T item) { items_.emplace_back(now + latency_, std::move(item)); }

  bool ready(Cycle now) const { return !items_.empty() && items_.front().first <= now; }
  Cycle front_ready_cycle() const { return items_.front().first; }
  const T& front() const { return items_.front().second; }
  T pop() {
    T v = std::move(items_.front().second);
    items_.pop_front();
    return v;
  }

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  std::uint32_t latency() const { return latency_; }

 private:
  std::uint32_t latency_;
  std::deque<std::pair<Cycle, T>> items_;
};

}  // namespace mhasim
