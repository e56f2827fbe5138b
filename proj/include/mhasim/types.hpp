#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mhasim {

using Addr = std::uint64_t;
using Cycle = std::uint64_t;
using CoreId = std::uint32_t;

inline constexpr Cycle kNever = ~Cycle{0};

// Error categories map onto distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MappingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DeadlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One line-granular request travelling from an L1 miss (or write-through)
/// to its L2 slice.
struct MemRequest {
  std::uint64_t id = 0;  // unique per run, assigned in issue order
  CoreId core = 0;
  std::uint32_t window = 0;
  std::uint64_t tb_id = 0;
  std::uint32_t op_index = 0;  // position of the op inside its thread block
  Addr line = 0;               // line-aligned byte address
  bool is_write = false;
  Cycle issued = 0;   // cycle the core issued it
  Cycle arrived = 0;  // cycle it became eligible at the slice ingress
};

/// Response delivered back to the requesting core.
struct MemResponse {
  std::uint64_t request_id = 0;
  CoreId core = 0;
  std::uint32_t window = 0;
  std::uint64_t tb_id = 0;
  std::uint32_t op_index = 0;
  Addr line = 0;
  bool is_write = false;
};

inline MemResponse response_for(const MemRequest& r) {
  return {r.id, r.core, r.window, r.tb_id, r.op_index, r.line, r.is_write};
}

}  // namespace mhasim
