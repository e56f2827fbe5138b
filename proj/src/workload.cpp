#include "mhasim/workload.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace mhasim {

namespace {

constexpr Addr kLayoutAlign = Addr{1} << 20;

Addr align_up(Addr v, Addr a) { return (v + a - 1) / a * a; }

TensorLayout row_major(Addr base, std::vector<std::uint64_t> dims, std::uint64_t elem) {
  TensorLayout t;
  t.base = base;
  t.strides.assign(dims.size(), 0);
  std::uint64_t s = elem;
  for (std::size_t i = dims.size(); i-- > 0;) {
    t.strides[i] = s;
    s *= dims[i];
  }
  t.dims = std::move(dims);
  return t;
}

std::uint64_t axis_extent(const OperatorShape& s, Axis a) {
  switch (a) {
    case Axis::H: return s.H;
    case Axis::G: return s.G;
    case Axis::L: return s.L;
    case Axis::D: return s.D;
  }
  return 0;
}

std::uint64_t lines_spanned(const TensorLayout& t, std::uint64_t line) {
  if (t.size_bytes() == 0) return 0;
  return (align_up(t.end(), line) - t.base / line * line) / line;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_u64(std::string_view s, std::uint64_t& out, int base = 10) {
  if (base == 16 && s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc{} && p == s.data() + s.size();
}

// Position of each binding in the legal top-to-bottom order.
int binding_rank(Binding b) {
  switch (b) {
    case Binding::Spatial: return 0;
    case Binding::Window: return 1;
    case Binding::ThreadBlock: return 2;
    case Binding::L1: return 3;
  }
  return 4;
}

struct NestInfo {
  std::size_t num_spatial = 0;
  std::size_t body_begin = 0;  // first level inside a thread block
  std::uint64_t units = 1;
  std::uint64_t tbs_per_unit = 1;
  std::uint64_t body_l_extent = 1;
  std::vector<std::uint64_t> strides;  // per level, in units of the axis index
};

NestInfo analyze(const MappingSpec& m) {
  NestInfo info;
  const auto& lv = m.levels;
  while (info.num_spatial < lv.size() && lv[info.num_spatial].bind == Binding::Spatial) ++info.num_spatial;
  info.body_begin = info.num_spatial;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (lv[i].bind == Binding::ThreadBlock) info.body_begin = i + 1;
  }
  for (std::size_t i = 0; i < info.num_spatial; ++i) info.units *= lv[i].extent;
  for (std::size_t i = info.num_spatial; i < info.body_begin; ++i) info.tbs_per_unit *= lv[i].extent;
  for (std::size_t i = info.body_begin; i < lv.size(); ++i) {
    if (lv[i].axis == Axis::L) info.body_l_extent *= lv[i].extent;
  }
  info.strides.assign(lv.size(), 1);
  for (std::size_t i = 0; i < lv.size(); ++i) {
    std::uint64_t s = 1;
    for (std::size_t j = i + 1; j < lv.size(); ++j) {
      if (lv[j].axis == lv[i].axis) s *= lv[j].extent;
    }
    info.strides[i] = s;
  }
  return info;
}

}  // namespace

void OperatorShape::validate(std::uint64_t line_size) const {
  if (H == 0 || G == 0 || L == 0 || D == 0 || elem_bytes == 0) {
    throw MappingError("operator shape fields must all be >= 1");
  }
  if (line_size == 0 || (D * elem_bytes) % line_size != 0) {
    throw MappingError("D * elem_bytes (" + std::to_string(D * elem_bytes) +
                       ") is not a multiple of the line size " + std::to_string(line_size));
  }
}

std::uint64_t TensorLayout::size_bytes() const {
  if (dims.empty()) return 0;
  std::uint64_t last = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == 0) return 0;
    last += (dims[i] - 1) * strides[i];
  }
  // Element size is the innermost stride for row-major layouts.
  return last + strides.back();
}

Addr TensorLayout::address(std::span<const std::uint64_t> index) const {
  if (index.size() != dims.size()) throw TraceError("tensor index rank mismatch");
  Addr a = base;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (index[i] >= dims[i]) {
      throw TraceError("tensor index " + std::to_string(index[i]) + " out of range for dim " +
                       std::to_string(i) + " (extent " + std::to_string(dims[i]) + ")");
    }
    a += index[i] * strides[i];
  }
  return a;
}

LogitLayouts default_layouts(const OperatorShape& s) {
  LogitLayouts l;
  l.q = row_major(0, {s.H, s.G, s.D}, s.elem_bytes);
  Addr kbase = align_up(l.q.end(), kLayoutAlign) + kLayoutAlign;
  l.k = row_major(kbase, {s.H, s.L, s.D}, s.elem_bytes);
  Addr obase = align_up(l.k.end(), kLayoutAlign) + kLayoutAlign;
  l.out = row_major(obase, {s.H, s.G, s.L}, s.elem_bytes);
  return l;
}

bool layouts_disjoint(const LogitLayouts& l) {
  const std::array<const TensorLayout*, 3> t{&l.q, &l.k, &l.out};
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (t[i]->base < t[j]->end() && t[j]->base < t[i]->end()) return false;
    }
  }
  return true;
}

const char* to_string(Axis a) {
  switch (a) {
    case Axis::H: return "H";
    case Axis::G: return "G";
    case Axis::L: return "L";
    case Axis::D: return "D";
  }
  return "?";
}

const char* to_string(Binding b) {
  switch (b) {
    case Binding::Spatial: return "spatial";
    case Binding::Window: return "window";
    case Binding::ThreadBlock: return "tb";
    case Binding::L1: return "l1";
  }
  return "?";
}

std::string format_mapping(const MappingSpec& m) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.levels.size(); ++i) {
    const auto& l = m.levels[i];
    os << "level " << i << ": axis=" << to_string(l.axis) << " extent=" << l.extent
       << " bind=" << to_string(l.bind) << '\n';
  }
  return os.str();
}

MappingSpec parse_mapping(std::string_view text) {
  MappingSpec m;
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto fail = [&](const std::string& why) {
      throw MappingError("mapping line " + std::to_string(lineno) + ": " + why);
    };
    if (line.substr(0, 6) != "level ") fail("expected 'level <n>: ...'");
    auto colon = line.find(':');
    if (colon == std::string_view::npos) fail("missing ':'");
    std::uint64_t n = 0;
    if (!parse_u64(trim(line.substr(6, colon - 6)), n)) fail("bad level number");
    if (n != m.levels.size()) fail("levels must be numbered consecutively from 0");

    LoopLevel lvl;
    bool has_axis = false, has_extent = false, has_bind = false;
    std::istringstream fields{std::string(line.substr(colon + 1))};
    std::string tok;
    while (fields >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) fail("expected key=value, got '" + tok + "'");
      std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "axis") {
        if (val == "H") lvl.axis = Axis::H;
        else if (val == "G") lvl.axis = Axis::G;
        else if (val == "L") lvl.axis = Axis::L;
        else if (val == "D") lvl.axis = Axis::D;
        else fail("unknown axis '" + val + "'");
        has_axis = true;
      } else if (key == "extent") {
        if (!parse_u64(val, lvl.extent) || lvl.extent == 0) fail("bad extent '" + val + "'");
        has_extent = true;
      } else if (key == "bind") {
        if (val == "spatial") lvl.bind = Binding::Spatial;
        else if (val == "window") lvl.bind = Binding::Window;
        else if (val == "tb") lvl.bind = Binding::ThreadBlock;
        else if (val == "l1") lvl.bind = Binding::L1;
        else fail("unknown binding '" + val + "'");
        has_bind = true;
      } else {
        fail("unknown key '" + key + "'");
      }
    }
    if (!has_axis || !has_extent || !has_bind) fail("axis, extent and bind are all required");
    m.levels.push_back(lvl);
  }
  return m;
}

MappingSpec read_mapping_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MappingError("cannot open mapping file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mapping(ss.str());
}

std::vector<std::string> validate_mapping(const OperatorShape& shape, const MappingSpec& m,
                                          std::uint64_t line_size, std::uint32_t vector_elems) {
  std::vector<std::string> diags;
  try {
    shape.validate(line_size);
  } catch (const MappingError& e) {
    diags.emplace_back(e.what());
    return diags;
  }
  if (m.levels.empty()) {
    diags.emplace_back("mapping has no levels");
    return diags;
  }

  for (Axis a : {Axis::H, Axis::G, Axis::L, Axis::D}) {
    std::uint64_t prod = 1;
    for (const auto& l : m.levels) {
      if (l.axis == a) prod *= l.extent;
    }
    if (prod != axis_extent(shape, a)) {
      diags.push_back(std::string("product of ") + to_string(a) + " extents is " + std::to_string(prod) +
                      ", operator extent is " + std::to_string(axis_extent(shape, a)));
    }
  }

  const auto& inner = m.levels.back();
  if (inner.axis != Axis::D || inner.bind != Binding::L1) {
    diags.emplace_back("innermost level must walk D with bind=l1");
  } else {
    if (inner.extent > vector_elems) {
      diags.push_back("innermost D extent " + std::to_string(inner.extent) + " exceeds the vector width " +
                      std::to_string(vector_elems));
    }
    if ((inner.extent * shape.elem_bytes) % line_size != 0) {
      diags.emplace_back("innermost D tile does not cover whole cache lines");
    }
  }

  int prev_rank = 0;
  int tb_levels = 0;
  for (std::size_t i = 0; i < m.levels.size(); ++i) {
    const auto& l = m.levels[i];
    int r = binding_rank(l.bind);
    if (r < prev_rank) {
      diags.push_back("level " + std::to_string(i) + " bind=" + to_string(l.bind) +
                      " is out of order (spatial, window, tb, l1 from outermost in)");
    }
    prev_rank = std::max(prev_rank, r);
    if (l.bind == Binding::ThreadBlock) ++tb_levels;
  }
  if (tb_levels > 1) diags.emplace_back("at most one tb level is allowed");
  if (!diags.empty()) return diags;

  // Every AttScore line must be owned by one thread block.
  const NestInfo info = analyze(m);
  const bool rows_line_aligned = (shape.L * shape.elem_bytes) % line_size == 0;
  const std::uint64_t total_tbs = info.units * info.tbs_per_unit;
  if (rows_line_aligned) {
    if ((info.body_l_extent * shape.elem_bytes) % line_size != 0) {
      diags.push_back("thread block body maps " + std::to_string(info.body_l_extent * shape.elem_bytes) +
                      " bytes of L, not a whole number of " + std::to_string(line_size) +
                      "-byte output lines (output lines would be shared)");
    }
  } else if (total_tbs != 1) {
    diags.emplace_back("AttScore rows are not line aligned; only a single thread block avoids shared output lines");
  }
  return diags;
}

MappingSpec build_logit_mapping(const OperatorShape& shape, std::uint32_t num_cores,
                                std::uint32_t tb_output_lines, std::uint64_t line_size) {
  shape.validate(line_size);
  if (num_cores == 0) throw MappingError("num_cores must be >= 1");
  if (tb_output_lines == 0) throw MappingError("tb_output_lines must be >= 1");

  MappingSpec m;
  auto push = [&](Axis a, std::uint64_t e, Binding b) {
    if (e > 1) m.levels.push_back({a, e, b});
  };

  const std::uint64_t row_bytes = shape.L * shape.elem_bytes;
  if (row_bytes % line_size != 0) {
    if (shape.H * shape.G * shape.L == 1 && shape.D <= kVectorElems) {
      m.levels.push_back({Axis::D, shape.D, Binding::L1});
      return m;
    }
    throw MappingError("infeasible: L * elem_bytes = " + std::to_string(row_bytes) +
                       " bytes cannot place whole output lines (" + std::to_string(line_size) +
                       "B) in the innermost L tile");
  }
  const std::uint64_t tb_tokens = tb_output_lines * line_size / shape.elem_bytes;
  if (tb_tokens * shape.elem_bytes != tb_output_lines * line_size || shape.L % tb_tokens != 0) {
    throw MappingError("infeasible: " + std::to_string(tb_output_lines) + " output lines per thread block (" +
                       std::to_string(tb_tokens) + " tokens) does not tile L=" + std::to_string(shape.L));
  }

  // Query heads of a group go to different cores so they read each K line at
  // about the same time. H fans out only as far as needed to fill the cores.
  std::uint64_t g_spatial = 1;
  for (std::uint64_t d = 1; d <= shape.G; ++d) {
    if (shape.G % d == 0 && d <= num_cores) g_spatial = d;
  }
  std::uint64_t h_spatial = shape.H;
  for (std::uint64_t d = 1; d <= shape.H; ++d) {
    if (shape.H % d == 0 && g_spatial * d >= num_cores) {
      h_spatial = d;
      break;
    }
  }
  push(Axis::G, g_spatial, Binding::Spatial);
  push(Axis::H, h_spatial, Binding::Spatial);
  push(Axis::H, shape.H / h_spatial, Binding::Window);
  push(Axis::G, shape.G / g_spatial, Binding::Window);
  push(Axis::L, shape.L / tb_tokens, Binding::ThreadBlock);
  push(Axis::L, tb_tokens, Binding::L1);
  if (shape.D > kVectorElems) {
    if (shape.D % kVectorElems != 0) throw MappingError("infeasible: D is not a multiple of the vector width");
    push(Axis::D, shape.D / kVectorElems, Binding::L1);
    m.levels.push_back({Axis::D, kVectorElems, Binding::L1});
  } else {
    m.levels.push_back({Axis::D, shape.D, Binding::L1});
  }

  auto diags = validate_mapping(shape, m, line_size);
  if (!diags.empty()) throw MappingError("internal: generated mapping invalid: " + diags.front());
  return m;
}

std::vector<CoreTrace> generate_traces(const OperatorShape& shape, const MappingSpec& mapping,
                                       const LogitLayouts& layouts, const GenOptions& opts) {
  if (opts.num_cores == 0) throw MappingError("num_cores must be >= 1");
  auto diags = validate_mapping(shape, mapping, opts.line_size, opts.vector_elems);
  if (!diags.empty()) throw MappingError("invalid mapping: " + diags.front());
  if (!layouts_disjoint(layouts)) throw TraceError("tensor layouts overlap");

  const auto& lv = mapping.levels;
  const NestInfo info = analyze(mapping);
  const std::size_t n = lv.size();
  const std::size_t inner = n - 1;
  const std::uint64_t line = opts.line_size;
  const std::uint64_t vec_bytes = lv[inner].extent * shape.elem_bytes;

  std::vector<CoreTrace> cores(opts.num_cores);
  std::unordered_set<Addr> written;
  std::uint64_t next_tb = 0;

  std::vector<std::uint64_t> idx(n, 0);
  auto axis_index = [&](Axis a) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (lv[i].axis == a) v += idx[i] * info.strides[i];
    }
    return v;
  };
  // Odometer over levels [lo, hi); returns false when it wraps.
  auto advance = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = hi; i-- > lo;) {
      if (++idx[i] < lv[i].extent) return true;
      idx[i] = 0;
    }
    return false;
  };
  auto emit_lines = [&](std::vector<TraceOp>& ops, Addr start) {
    for (Addr a = start / line * line; a < start + vec_bytes; a += line) ops.push_back(TraceOp::read(a));
  };

  const std::size_t body_end = inner;  // innermost level is the vector access
  for (std::uint64_t u = 0; u < info.units; ++u) {
    const auto core = static_cast<CoreId>(u * opts.num_cores / info.units);
    std::uint64_t rem = u;
    for (std::size_t i = info.num_spatial; i-- > 0;) {
      idx[i] = rem % lv[i].extent;
      rem /= lv[i].extent;
    }
    for (std::size_t i = info.num_spatial; i < n; ++i) idx[i] = 0;

    do {
      ThreadBlock tb;
      tb.tb_id = next_tb++;
      tb.home_core = core;
      std::vector<Addr> outs;
      std::unordered_set<Addr> outs_seen;
      for (std::size_t i = info.body_begin; i < n; ++i) idx[i] = 0;
      do {
        const std::uint64_t h = axis_index(Axis::H), g = axis_index(Axis::G);
        const std::uint64_t l = axis_index(Axis::L), d0 = axis_index(Axis::D);
        const std::array<std::uint64_t, 3> qi{h, g, d0}, ki{h, l, d0}, oi{h, g, l};
        emit_lines(tb.ops, layouts.q.address(qi));
        emit_lines(tb.ops, layouts.k.address(ki));
        tb.ops.push_back(TraceOp::compute(1));
        const Addr out_line = layouts.out.address(oi) / line * line;
        if (outs_seen.insert(out_line).second) outs.push_back(out_line);
      } while (advance(info.body_begin, body_end));

      for (Addr a : outs) {
        if (!written.insert(a).second) {
          throw MappingError("output line written by more than one thread block");
        }
        tb.ops.push_back(TraceOp::write(a));
      }
      tb.output_lines = static_cast<std::uint32_t>(outs.size());
      cores[core].push_back(std::move(tb));
    } while (advance(info.num_spatial, info.body_begin));
  }
  return cores;
}

Footprint footprint(const OperatorShape& s, const LogitLayouts& layouts, std::uint64_t line_size) {
  Footprint f;
  f.q_bytes = s.H * s.G * s.D * s.elem_bytes;
  f.k_bytes = s.H * s.L * s.D * s.elem_bytes;
  f.out_bytes = s.H * s.G * s.L * s.elem_bytes;
  f.unique_lines = lines_spanned(layouts.q, line_size) + lines_spanned(layouts.k, line_size) +
                   lines_spanned(layouts.out, line_size);
  return f;
}

void emit_trace(std::ostream& os, std::span<const ThreadBlock> blocks) {
  char buf[32];
  for (const auto& tb : blocks) {
    if (tb.ops.empty()) throw TraceError("thread block " + std::to_string(tb.tb_id) + " has no ops");
    os << "TB " << tb.tb_id << '\n';
    for (const auto& op : tb.ops) {
      switch (op.kind) {
        case OpKind::Compute:
          if (op.bubble_cycles == 0) throw TraceError("compute op with zero cycles");
          os << "C " << op.bubble_cycles << '\n';
          break;
        case OpKind::Read:
        case OpKind::Write: {
          auto [p, ec] = std::to_chars(buf, buf + sizeof buf, op.addr, 16);
          os << (op.kind == OpKind::Read ? "R 0x" : "W 0x") << std::string_view(buf, p - buf) << '\n';
          break;
        }
      }
    }
  }
}

std::string emit_trace(std::span<const ThreadBlock> blocks) {
  std::ostringstream os;
  emit_trace(os, blocks);
  return os.str();
}

CoreTrace parse_trace(std::string_view text, CoreId home_core) {
  CoreTrace blocks;
  std::size_t lineno = 0;
  auto finish = [&] {
    if (blocks.empty()) return;
    auto& tb = blocks.back();
    if (tb.ops.empty()) throw TraceError("thread block " + std::to_string(tb.tb_id) + " has no ops");
    std::unordered_set<Addr> w;
    for (const auto& op : tb.ops) {
      if (op.kind == OpKind::Write) w.insert(op.addr);
    }
    tb.output_lines = static_cast<std::uint32_t>(w.size());
  };
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& why) {
      throw TraceError("trace line " + std::to_string(lineno) + ": " + why);
    };
    auto sp = line.find(' ');
    if (sp == std::string_view::npos) fail("missing operand");
    std::string_view kind = line.substr(0, sp), arg = trim(line.substr(sp + 1));
    std::uint64_t v = 0;
    if (kind == "TB") {
      if (!parse_u64(arg, v)) fail("bad thread block id");
      finish();
      blocks.push_back(ThreadBlock{v, home_core, {}, 0});
      continue;
    }
    if (blocks.empty()) fail("op before first TB header");
    auto& ops = blocks.back().ops;
    if (kind == "C") {
      if (!parse_u64(arg, v) || v == 0 || v > 0xffffffffu) fail("bad compute cycle count");
      ops.push_back(TraceOp::compute(static_cast<std::uint32_t>(v)));
    } else if (kind == "R" || kind == "W") {
      if (!parse_u64(arg, v, 16)) fail("bad address");
      ops.push_back(kind == "R" ? TraceOp::read(v) : TraceOp::write(v));
    } else {
      fail("unknown record kind '" + std::string(kind) + "'");
    }
  }
  finish();
  return blocks;
}

CoreTrace read_trace_file(const std::string& path, CoreId home_core) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError("cannot open trace file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_trace(ss.str(), home_core);
  } catch (const TraceError& e) {
    throw TraceError(path + ": " + e.what());
  }
}

void write_trace_file(const std::string& path, std::span<const ThreadBlock> blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot write trace file '" + path + "'");
  emit_trace(out, blocks);
}

OperatorShape model_preset(std::string_view name, std::uint64_t seqlen) {
  if (name == "llama3-70b") return {8, 8, seqlen, 128, 1};
  if (name == "llama3-405b") return {8, 16, seqlen, 128, 1};
  throw ConfigError("unknown model preset '" + std::string(name) + "'");
}

}  // namespace mhasim
