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

#ifndef XASM_CFG_HPP_
#define XASM_CFG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "xasm/corpus.hpp"

namespace xasm {

using NodeId = std::uint32_t;

// Directed graph of basic blocks. Node ordinals index `nodes`; every node is
// reachable from `entry`.
class Cfg {
 public:
  Cfg() = default;
  // Validates ordinals and reachability; throws Error(kMalformedRecord).
  Cfg(Arch arch, Opt opt, NodeId entry, std::vector<BasicBlock> nodes,
      std::vector<std::pair<NodeId, NodeId>> edges);

  Arch arch() const { return arch_; }
  Opt opt() const { return opt_; }
  NodeId entry() const { return entry_; }
  std::size_t size() const { return nodes_.size(); }
  const BasicBlock& node(NodeId n) const { return nodes_[n]; }
  const std::vector<BasicBlock>& nodes() const { return nodes_; }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  // Sorted ascending, duplicates removed.
  const std::vector<NodeId>& successors(NodeId n) const { return succ_[n]; }
  const std::vector<NodeId>& predecessors(NodeId n) const { return pred_[n]; }
  bool HasEdge(NodeId from, NodeId to) const;

  // Nodes reachable from `start`, including it.
  std::vector<bool> ReachableFrom(NodeId start) const;

 private:
  Arch arch_ = Arch::kX86_64;
  Opt opt_ = Opt::kO2;
  NodeId entry_ = 0;
  std::vector<BasicBlock> nodes_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<std::vector<NodeId>> succ_;
  std::vector<std::vector<NodeId>> pred_;
};

// CFG file: {"arch", "opt", "entry", "nodes": [<block record>...],
//            "edges": [[from, to], ...]}
Cfg ParseCfg(std::istream& in, const ParseOptions& options = {});
Cfg ParseCfgFile(const std::filesystem::path& path,
                 const ParseOptions& options = {});
void WriteCfg(const Cfg& cfg, std::ostream& out);

}  // namespace xasm

#endif  // XASM_CFG_HPP_
