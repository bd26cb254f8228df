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

#ifndef XASM_SYNTH_HPP_
#define XASM_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "xasm/cfg.hpp"
#include "xasm/corpus.hpp"
#include "xasm/rng.hpp"

// Template-generated corpora standing in for a cross-compiled build: every
// block template is rendered once per architecture, so equal ids mark
// semantically equivalent blocks. Each rendering draws its own register
// assignment, constants stay shared, and some operations take more than one
// instruction on one side.

namespace xasm {

struct OpInstance {
  std::uint8_t op = 0;
  std::uint8_t a = 0;  // virtual registers
  std::uint8_t b = 0;
  std::int64_t k = 0;         // immediate
  std::uint32_t offset = 0;   // stack slot
  std::uint32_t symbol = 0;   // global, function or label number
};

struct BlockTemplate {
  std::vector<OpInstance> ops;
};

struct SynthOptions {
  std::size_t functions = 200;
  std::size_t min_blocks = 3;
  std::size_t max_blocks = 12;
  std::size_t min_ops = 2;
  std::size_t max_ops = 8;
  Opt opt = Opt::kO2;
  std::uint64_t seed = 1;
};

std::size_t SynthOpCount();

BlockTemplate RandomTemplate(Rng& rng, const SynthOptions& options);

// Raw assembly text of the template; rng picks the register assignment.
BasicBlock RenderBlock(const BlockTemplate& tmpl, Arch arch, Opt opt,
                       std::uint32_t id, Rng& rng);

struct SynthCorpora {
  Corpus x86;  // raw text
  Corpus arm;
};

SynthCorpora SynthesizeCorpora(const SynthOptions& options);

// Random graph over the given blocks, entry 0: a random spanning tree plus
// extra_edges further edges (some of them back edges).
Cfg RandomCfg(Arch arch, Opt opt, std::vector<BasicBlock> blocks,
              std::size_t extra_edges, Rng& rng);

struct PlantedOptions {
  std::size_t query_blocks = 10;
  std::size_t target_blocks = 100;  // including the planted copy and junk
  std::size_t decoys = 3;
  Arch query_arch = Arch::kX86_64;
  Arch target_arch = Arch::kArm;
  SynthOptions blocks;  // block shape; functions is ignored
  std::uint64_t seed = 1;
};

// All blocks normalized.
struct PlantedCase {
  Cfg query;
  Cfg target;
  std::vector<NodeId> planted;  // target ordinal of each query node
  NodeId junk = 0;              // block inserted inside the planted copy
  std::vector<Cfg> decoys;      // unrelated targets of the same size
};

PlantedCase SynthesizePlantedCase(const PlantedOptions& options);

}  // namespace xasm

#endif  // XASM_SYNTH_HPP_
