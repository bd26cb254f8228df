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

#include "xasm/cfg.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "xasm/error.hpp"

namespace xasm {

Cfg::Cfg(Arch arch, Opt opt, NodeId entry, std::vector<BasicBlock> nodes,
         std::vector<std::pair<NodeId, NodeId>> edges)
    : arch_(arch),
      opt_(opt),
      entry_(entry),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)) {
  if (nodes_.empty()) throw Error(ErrorCode::kMalformedRecord, "CFG has no nodes");
  if (entry_ >= nodes_.size()) {
    throw Error(ErrorCode::kMalformedRecord, "entry ordinal out of range");
  }
  succ_.resize(nodes_.size());
  pred_.resize(nodes_.size());
  for (const auto& [from, to] : edges_) {
    if (from >= nodes_.size() || to >= nodes_.size()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "edge [" + std::to_string(from) + "," + std::to_string(to) +
                      "] references a missing node");
    }
    succ_[from].push_back(to);
    pred_[to].push_back(from);
  }
  for (auto* adjacency : {&succ_, &pred_}) {
    for (auto& list : *adjacency) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }
  const auto reachable = ReachableFrom(entry_);
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (!reachable[n]) {
      throw Error(ErrorCode::kMalformedRecord,
                  "node " + std::to_string(n) + " unreachable from entry");
    }
  }
}

bool Cfg::HasEdge(NodeId from, NodeId to) const {
  const auto& s = succ_[from];
  return std::binary_search(s.begin(), s.end(), to);
}

std::vector<bool> Cfg::ReachableFrom(NodeId start) const {
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack = {start};
  seen[start] = true;
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (NodeId m : succ_[n]) {
      if (!seen[m]) {
        seen[m] = true;
        stack.push_back(m);
      }
    }
  }
  return seen;
}

Cfg ParseCfg(std::istream& in, const ParseOptions& options) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
  try {
    for (const char* key : {"arch", "opt"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        throw Error(ErrorCode::kMalformedRecord,
                    std::string("CFG needs string '") + key + "'");
      }
    }
    if (!j.contains("entry") || !j["entry"].is_number_unsigned() ||
        !j.contains("nodes") || !j["nodes"].is_array() ||
        !j.contains("edges") || !j["edges"].is_array()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "CFG needs 'entry', 'nodes' and 'edges'");
    }
    const Arch arch = ParseArch(j["arch"].get<std::string>());
    const Opt opt = ParseOpt(j["opt"].get<std::string>());
    std::vector<BasicBlock> nodes;
    for (const auto& record : j["nodes"]) {
      nodes.push_back(BlockFromJson(record, arch, opt, options));
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
          !e[1].is_number_unsigned()) {
        throw Error(ErrorCode::kMalformedRecord, "edge must be [from, to]");
      }
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    return Cfg(arch, opt, j["entry"].get<NodeId>(), std::move(nodes),
               std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedRecord) throw;
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
}

Cfg ParseCfgFile(const std::filesystem::path& path,
                 const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ParseCfg(in, options);
}

void WriteCfg(const Cfg& cfg, std::ostream& out) {
  nlohmann::json j;
  j["arch"] = ArchName(cfg.arch());
  j["opt"] = OptName(cfg.opt());
  j["entry"] = cfg.entry();
  j["nodes"] = nlohmann::json::array();
  for (const auto& node : cfg.nodes()) j["nodes"].push_back(BlockToJson(node, false));
  j["edges"] = nlohmann::json::array();
  for (const auto& [from, to] : cfg.edges()) j["edges"].push_back({from, to});
  out << j.dump() << '\n';
}

}  // namespace xasm
