// Copyright 2026 The xasm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xasm/synth.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <string_view>

namespace xasm {

namespace {

// Placeholders: {a} {b} registers, {k} immediate, {o} stack offset,
// {g} global, {f} function, {l} local label, {s} string label. A '\n'
// separates instructions.
struct OpSpec {
  std::string_view x86;
  std::string_view arm;
  bool terminator = false;
};

constexpr std::array<OpSpec, 30> kOps = {{
    {"mov {a}, {b}", "mov {a}, {b}"},
    {"mov {a}, {k}", "mov {a}, #{k}"},
    {"add {a}, {b}", "add {a}, {a}, {b}"},
    {"add {a}, {k}", "add {a}, {a}, #{k}"},
    {"sub {a}, {b}", "sub {a}, {a}, {b}"},
    {"sub {a}, {k}", "sub {a}, {a}, #{k}"},
    {"imul {a}, {b}", "mul {a}, {a}, {b}"},
    {"and {a}, {b}", "and {a}, {a}, {b}"},
    {"or {a}, {b}", "orr {a}, {a}, {b}"},
    {"xor {a}, {b}", "eor {a}, {a}, {b}"},
    {"shl {a}, {k}", "lsl {a}, {a}, #{k}"},
    {"sar {a}, {k}", "asr {a}, {a}, #{k}"},
    {"mov {a}, dword ptr [rbp-{o}]", "ldr {a}, [sp, #{o}]"},
    {"mov dword ptr [rbp-{o}], {a}", "str {a}, [sp, #{o}]"},
    {"mov {a}, dword ptr [rip+{g}]", "adrp x8, {g}\nldr {a}, [x8, :lo12:{g}]"},
    {"mov dword ptr [rip+{g}], {a}", "adrp x8, {g}\nstr {a}, [x8, :lo12:{g}]"},
    {"lea rdi, [rip+{s}]", "adrp x0, {s}\nadd x0, x0, :lo12:{s}"},
    {"call {f}", "bl {f}"},
    {"cmp {a}, {b}", "cmp {a}, {b}"},
    {"cmp {a}, {k}", "cmp {a}, #{k}"},
    {"neg {a}", "neg {a}, {a}"},
    {"not {a}", "mvn {a}, {a}"},
    {"test {a}, {a}\nsete al\nmovzx {a}, al", "cmp {a}, #0\ncset {a}, eq"},
    {"mov eax, {a}\ncdq\nidiv {b}\nmov {a}, eax", "sdiv {a}, {a}, {b}"},
    {"movzx {a}, byte ptr [rbp-{o}]", "ldrb {a}, [sp, #{o}]"},
    {"lea {a}, [{a}+{b}*4]", "add {a}, {a}, {b}, lsl #2"},
    {"jmp {l}", "b {l}", true},
    {"jne {l}", "b.ne {l}", true},
    {"jl {l}", "b.lt {l}", true},
    {"ret", "ret", true},
}};

constexpr std::size_t kRegisters = 6;
constexpr double kIdiomRate = 0.6;
constexpr std::size_t kIdiomSuccessors = 3;
constexpr double kRegisterReuse = 0.5;
constexpr std::array<std::string_view, kRegisters> kX86Regs = {
    "eax", "ebx", "ecx", "edx", "esi", "edi"};
constexpr std::array<std::string_view, kRegisters> kArmRegs = {
    "w1", "w2", "w3", "w4", "w5", "w6"};

std::size_t BodyOpCount() {
  return static_cast<std::size_t>(
      std::count_if(kOps.begin(), kOps.end(),
                    [](const OpSpec& s) { return !s.terminator; }));
}

std::string Immediate(std::int64_t k, Rng& rng) {
  if (k > 9 && rng.Below(2) == 0) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string digits;
    for (auto v = static_cast<std::uint64_t>(k); v != 0; v >>= 4) {
      digits.insert(digits.begin(), kHex[v & 15]);
    }
    return "0x" + digits;
  }
  return std::to_string(k);
}

std::string Render(std::string_view pattern, const OpInstance& op,
                   const std::array<std::uint8_t, kRegisters>& regs, Arch arch,
                   Rng& rng) {
  const auto& names = arch == Arch::kX86_64 ? kX86Regs : kArmRegs;
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '{') {
      out += pattern[i];
      continue;
    }
    const char key = pattern[i + 1];
    i += 2;
    switch (key) {
      case 'a': out += names[regs[op.a]]; break;
      case 'b': out += names[regs[op.b]]; break;
      case 'k': out += Immediate(op.k, rng); break;
      case 'o': out += std::to_string(op.offset); break;
      case 'g': out += "g_var" + std::to_string(op.symbol); break;
      case 'f': out += "fn_" + std::to_string(op.symbol); break;
      case 'l': out += ".LBB" + std::to_string(op.symbol / 16) + "_" +
                       std::to_string(op.symbol % 16); break;
      case 's': out += ".L.str." + std::to_string(op.symbol); break;
    }
  }
  return out;
}

std::vector<BasicBlock> Normalized(std::vector<BasicBlock> blocks) {
  for (auto& block : blocks) {
    for (auto& instr : block.instrs) instr = NormalizeInstruction(instr, block.arch);
  }
  return blocks;
}

}  // namespace

std::size_t SynthOpCount() { return kOps.size(); }

BlockTemplate RandomTemplate(Rng& rng, const SynthOptions& options) {
  BlockTemplate tmpl;
  const std::size_t span = options.max_ops - options.min_ops + 1;
  const std::size_t n = options.min_ops + rng.Below(span);
  auto draw = [&rng](std::uint8_t op) {
    OpInstance inst;
    inst.op = op;
    inst.a = static_cast<std::uint8_t>(rng.Below(kRegisters));
    inst.b = static_cast<std::uint8_t>(rng.Below(kRegisters));
    inst.k = op == 10 || op == 11 ? static_cast<std::int64_t>(1 + rng.Below(31))
                                  : static_cast<std::int64_t>(rng.Below(4096));
    inst.offset = static_cast<std::uint32_t>(4 * (1 + rng.Below(64)));
    inst.symbol = static_cast<std::uint32_t>(rng.Below(10000));
    return inst;
  };
  // Ops follow idioms: most of the time the next op is one of a few fixed
  // successors of the previous one, and it often reuses its destination.
  const std::size_t body = BodyOpCount();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t op = rng.Below(body);
    if (i > 0 && rng.Uniform() < kIdiomRate) {
      const std::size_t prev = tmpl.ops.back().op;
      op = (prev * 7 + 3 + 5 * rng.Below(kIdiomSuccessors)) % body;
    }
    OpInstance inst = draw(static_cast<std::uint8_t>(op));
    if (i > 0 && rng.Uniform() < kRegisterReuse) inst.a = tmpl.ops.back().a;
    tmpl.ops.push_back(inst);
  }
  if (rng.Below(2) == 0) {
    const std::size_t terminators = kOps.size() - body;
    tmpl.ops.push_back(
        draw(static_cast<std::uint8_t>(body + rng.Below(terminators))));
  }
  return tmpl;
}

BasicBlock RenderBlock(const BlockTemplate& tmpl, Arch arch, Opt opt,
                       std::uint32_t id, Rng& rng) {
  std::array<std::uint8_t, kRegisters> regs;
  std::iota(regs.begin(), regs.end(), 0);
  for (std::size_t i = kRegisters; i > 1; --i) {
    std::swap(regs[i - 1], regs[rng.Below(i)]);
  }
  BasicBlock block;
  block.id = id;
  block.arch = arch;
  block.opt = opt;
  for (const auto& op : tmpl.ops) {
    const auto& spec = kOps[op.op];
    const std::string text =
        Render(arch == Arch::kX86_64 ? spec.x86 : spec.arm, op, regs, arch, rng);
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = std::min(text.find('\n', start), text.size());
      block.instrs.push_back(text.substr(start, end - start));
      start = end + 1;
    }
  }
  return block;
}

SynthCorpora SynthesizeCorpora(const SynthOptions& options) {
  Rng rng(options.seed);
  SynthCorpora out;
  std::uint32_t next_id = 0;
  for (std::size_t f = 0; f < options.functions; ++f) {
    const std::string name = "fn_" + std::to_string(f);
    Function fx{name, Arch::kX86_64, options.opt, {}};
    Function fa{name, Arch::kArm, options.opt, {}};
    const std::size_t blocks =
        options.min_blocks +
        rng.Below(options.max_blocks - options.min_blocks + 1);
    for (std::size_t b = 0; b < blocks; ++b) {
      const BlockTemplate tmpl = RandomTemplate(rng, options);
      fx.blocks.push_back(RenderBlock(tmpl, Arch::kX86_64, options.opt, next_id, rng));
      fa.blocks.push_back(RenderBlock(tmpl, Arch::kArm, options.opt, next_id, rng));
      ++next_id;
    }
    out.x86.functions.push_back(std::move(fx));
    out.arm.functions.push_back(std::move(fa));
  }
  return out;
}

Cfg RandomCfg(Arch arch, Opt opt, std::vector<BasicBlock> blocks,
              std::size_t extra_edges, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  const auto n = static_cast<NodeId>(blocks.size());
  for (NodeId v = 1; v < n; ++v) {
    edges.emplace_back(static_cast<NodeId>(rng.Below(v)), v);
  }
  for (std::size_t e = 0; e < extra_edges && n > 1; ++e) {
    edges.emplace_back(static_cast<NodeId>(rng.Below(n)),
                       static_cast<NodeId>(1 + rng.Below(n - 1)));
  }
  return Cfg(arch, opt, 0, std::move(blocks), std::move(edges));
}

PlantedCase SynthesizePlantedCase(const PlantedOptions& options) {
  Rng rng(options.seed);
  const Opt opt = options.blocks.opt;
  const std::size_t q = options.query_blocks;
  std::uint32_t next_id = 0;

  // Query: a chain with two forward skips and one loop.
  std::vector<BlockTemplate> templates;
  std::vector<BasicBlock> query_blocks;
  for (std::size_t i = 0; i < q; ++i) {
    templates.push_back(RandomTemplate(rng, options.blocks));
    query_blocks.push_back(
        RenderBlock(templates.back(), options.query_arch, opt, next_id++, rng));
  }
  std::vector<std::pair<NodeId, NodeId>> query_edges;
  for (NodeId i = 0; i + 1 < q; ++i) query_edges.emplace_back(i, i + 1);
  if (q >= 4) {
    for (int s = 0; s < 2; ++s) {
      const auto from = static_cast<NodeId>(rng.Below(q - 2));
      query_edges.emplace_back(from, from + 2);
    }
    const auto to = static_cast<NodeId>(1 + rng.Below(q - 3));
    query_edges.emplace_back(static_cast<NodeId>(to + 2), to);
  }

  // Target: random outside blocks around a re-rendered copy of the query
  // with one junk block spliced into a chain edge.
  const std::size_t outside = options.target_blocks - q - 1;
  std::vector<BasicBlock> blocks;
  for (std::size_t i = 0; i < outside; ++i) {
    blocks.push_back(RenderBlock(RandomTemplate(rng, options.blocks),
                                 options.target_arch, opt, next_id++, rng));
  }
  const auto base = static_cast<NodeId>(outside);
  for (std::size_t i = 0; i < q; ++i) {
    blocks.push_back(RenderBlock(templates[i], options.target_arch, opt,
                                 query_blocks[i].id, rng));
  }
  const auto junk = static_cast<NodeId>(blocks.size());
  blocks.push_back(RenderBlock(RandomTemplate(rng, options.blocks),
                               options.target_arch, opt, next_id++, rng));

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 1; v < base; ++v) {
    edges.emplace_back(static_cast<NodeId>(rng.Below(v)), v);
  }
  for (std::size_t e = 0; e < outside / 5; ++e) {
    edges.emplace_back(static_cast<NodeId>(rng.Below(base)),
                       static_cast<NodeId>(1 + rng.Below(base - 1)));
  }
  const auto split = static_cast<NodeId>(rng.Below(q - 1));
  for (const auto& [from, to] : query_edges) {
    if (from == split && to == split + 1) {
      edges.emplace_back(base + from, junk);
      edges.emplace_back(junk, base + to);
    } else {
      edges.emplace_back(base + from, base + to);
    }
  }
  edges.emplace_back(static_cast<NodeId>(rng.Below(base)), base);
  edges.emplace_back(static_cast<NodeId>(base + q - 1),
                     static_cast<NodeId>(rng.Below(base)));

  // Shuffle ordinals, keeping the entry at 0.
  std::vector<NodeId> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<NodeId> tail(order.begin() + 1, order.end());
  rng.Shuffle(tail);
  std::copy(tail.begin(), tail.end(), order.begin() + 1);
  std::vector<BasicBlock> placed(blocks.size());
  for (std::size_t old = 0; old < blocks.size(); ++old) {
    placed[order[old]] = std::move(blocks[old]);
  }
  for (auto& [from, to] : edges) {
    from = order[from];
    to = order[to];
  }

  PlantedCase out;
  out.query = Cfg(options.query_arch, opt, 0, Normalized(std::move(query_blocks)),
                  std::move(query_edges));
  out.target = Cfg(options.target_arch, opt, 0, Normalized(std::move(placed)),
                   std::move(edges));
  for (std::size_t i = 0; i < q; ++i) out.planted.push_back(order[base + i]);
  out.junk = order[junk];
  for (std::size_t d = 0; d < options.decoys; ++d) {
    std::vector<BasicBlock> decoy;
    for (std::size_t i = 0; i < options.target_blocks; ++i) {
      decoy.push_back(RenderBlock(RandomTemplate(rng, options.blocks),
                                  options.target_arch, opt, next_id++, rng));
    }
    out.decoys.push_back(RandomCfg(options.target_arch, opt,
                                   Normalized(std::move(decoy)),
                                   options.target_blocks / 5, rng));
  }
  return out;
}

}  // namespace xasm
