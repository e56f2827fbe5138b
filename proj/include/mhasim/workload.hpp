#pragma once

// GQA Logit (Q x K^T) workload lowering: operator shape -> loop-nest mapping ->
// per-core, thread-block-structured memory traces.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mhasim/types.hpp"

namespace mhasim {

inline constexpr std::uint32_t kVectorElems = 128;

struct OperatorShape {
  std::uint64_t H = 1;  // head groups (K/V heads)
  std::uint64_t G = 1;  // query heads per group
  std::uint64_t L = 1;  // sequence length
  std::uint64_t D = 1;  // dimension per head
  std::uint64_t elem_bytes = 1;

  /// Throws MappingError when a field is zero or a head row is not a whole
  /// number of cache lines.
  void validate(std::uint64_t line_size) const;
  bool operator==(const OperatorShape&) const = default;
};

/// Row-major tensor placement. strides are in bytes.
struct TensorLayout {
  Addr base = 0;
  std::vector<std::uint64_t> dims;
  std::vector<std::uint64_t> strides;

  std::uint64_t size_bytes() const;
  Addr end() const { return base + size_bytes(); }
  /// Byte address of an element; throws TraceError when out of range.
  Addr address(std::span<const std::uint64_t> index) const;
};

struct LogitLayouts {
  TensorLayout q;    // [H][G][D]
  TensorLayout k;    // [H][L][D]
  TensorLayout out;  // [H][G][L]
};

/// Q, then K, then AttScore, each base aligned to 1 MiB with a 1 MiB gap.
LogitLayouts default_layouts(const OperatorShape& shape);
bool layouts_disjoint(const LogitLayouts& layouts);

enum class Axis : std::uint8_t { H, G, L, D };
enum class Binding : std::uint8_t { Spatial, Window, ThreadBlock, L1 };

const char* to_string(Axis a);
const char* to_string(Binding b);

struct LoopLevel {
  Axis axis = Axis::D;
  std::uint64_t extent = 1;
  Binding bind = Binding::L1;
  bool operator==(const LoopLevel&) const = default;
};

/// Loop nest, outermost level first.
///
/// Leading `spatial` levels form the core fan-out: their iteration space is
/// flattened outer-major into work units and unit u runs on core
/// floor(u * num_cores / units). Below come `window` levels (sequencing thread
/// blocks on one core), at most one `tb` level (each of its iterations is a
/// thread block), then `l1` levels forming the block body. The innermost level
/// walks D and is issued as one vector access.
struct MappingSpec {
  std::vector<LoopLevel> levels;
  bool operator==(const MappingSpec&) const = default;
};

std::string format_mapping(const MappingSpec& mapping);
MappingSpec parse_mapping(std::string_view text);
MappingSpec read_mapping_file(const std::string& path);

/// Empty result means the mapping is legal for the shape.
std::vector<std::string> validate_mapping(const OperatorShape& shape, const MappingSpec& mapping,
                                          std::uint64_t line_size = 64,
                                          std::uint32_t vector_elems = kVectorElems);

/// Builds the default dataflow: the query heads of a group fanned out across
/// cores first, head groups next, D walked contiguously by the vector unit, L tiled so each thread block owns
/// `tb_output_lines` whole AttScore lines. Throws MappingError if no such
/// mapping exists.
MappingSpec build_logit_mapping(const OperatorShape& shape, std::uint32_t num_cores,
                                std::uint32_t tb_output_lines, std::uint64_t line_size = 64);

enum class OpKind : std::uint8_t { Compute, Read, Write };

struct TraceOp {
  OpKind kind = OpKind::Compute;
  Addr addr = 0;                   // reads and writes only
  std::uint32_t bubble_cycles = 0;  // compute only

  static TraceOp compute(std::uint32_t n) { return {OpKind::Compute, 0, n}; }
  static TraceOp read(Addr a) { return {OpKind::Read, a, 0}; }
  static TraceOp write(Addr a) { return {OpKind::Write, a, 0}; }
  bool operator==(const TraceOp&) const = default;
};

struct ThreadBlock {
  std::uint64_t tb_id = 0;
  CoreId home_core = 0;
  std::vector<TraceOp> ops;
  std::uint32_t output_lines = 0;
  bool operator==(const ThreadBlock&) const = default;
};

using CoreTrace = std::vector<ThreadBlock>;

struct GenOptions {
  std::uint32_t num_cores = 1;
  std::uint64_t line_size = 64;
  std::uint32_t vector_elems = kVectorElems;
};

/// Walks the loop nest and returns one ordered thread-block list per core.
/// Throws MappingError on an invalid mapping and TraceError on an address
/// outside its tensor.
std::vector<CoreTrace> generate_traces(const OperatorShape& shape, const MappingSpec& mapping,
                                       const LogitLayouts& layouts, const GenOptions& opts);

struct Footprint {
  std::uint64_t q_bytes = 0;
  std::uint64_t k_bytes = 0;
  std::uint64_t out_bytes = 0;
  std::uint64_t unique_lines = 0;
  bool operator==(const Footprint&) const = default;
};

Footprint footprint(const OperatorShape& shape, const LogitLayouts& layouts,
                    std::uint64_t line_size = 64);

// Trace text format, one file per core:
//   TB <tb_id>
//   C <n>
//   R <hex-line-addr>
//   W <hex-line-addr>
std::string emit_trace(std::span<const ThreadBlock> blocks);
void emit_trace(std::ostream& os, std::span<const ThreadBlock> blocks);
CoreTrace parse_trace(std::string_view text, CoreId home_core = 0);
CoreTrace read_trace_file(const std::string& path, CoreId home_core);
void write_trace_file(const std::string& path, std::span<const ThreadBlock> blocks);

/// Model presets: "llama3-70b" (H=8,G=8,D=128) and "llama3-405b" (H=8,G=16,D=128).
OperatorShape model_preset(std::string_view name, std::uint64_t seqlen);

}  // namespace mhasim
