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

#ifndef XASM_MATCHER_HPP_
#define XASM_MATCHER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "xasm/cfg.hpp"
#include "xasm/encoder.hpp"
#include "xasm/lsh_store.hpp"

namespace xasm {

using Path = std::vector<NodeId>;

// Linearly independent paths of g from `start` (default: entry). Paths are
// maximal walks, found depth-first with successors in ascending ordinal
// order, in which no node occurs more than twice (each loop unrolled once).
// A walk is emitted only if it adds a node missing from all earlier paths;
// emission stops once the emitted paths cover `coverage` of the nodes
// reachable from start.
std::vector<Path> LinearlyIndependentPaths(const Cfg& g, double coverage = 0.8,
                                           std::optional<NodeId> start = {});

// Query-node x target-node equivalence table.
class SebbMatrix {
 public:
  SebbMatrix() = default;
  SebbMatrix(std::size_t query_nodes, std::size_t target_nodes)
      : cols_(target_nodes), bits_(query_nodes * target_nodes, 0) {}

  bool operator()(NodeId q, NodeId t) const { return bits_[q * cols_ + t] != 0; }
  void Set(NodeId q, NodeId t, bool v) { bits_[q * cols_ + t] = v ? 1 : 0; }
  std::size_t query_nodes() const { return cols_ == 0 ? 0 : bits_.size() / cols_; }
  std::size_t target_nodes() const { return cols_; }

 private:
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Equivalence by identical normalized instruction text.
SebbMatrix TextEqualitySebb(const Cfg& query, const Cfg& target);

// Equivalence by encoder similarity >= threshold.
SebbMatrix EmbeddingSebb(std::span<const BlockEmbedding> query,
                         std::span<const BlockEmbedding> target,
                         double threshold);

// True iff the two blocks, each encoded by its architecture's tower, have
// similarity >= threshold.
bool IsSebb(const EncoderParams& params, const InstructionEmbedder& embedder,
            const BasicBlock& a, const BasicBlock& b, double threshold);

struct LcsOptions {
  // Occurrences of one target node allowed in a walk.
  std::size_t node_visit_limit = 2;
  // Walk extensions explored before settling for the best walk so far.
  std::size_t expansion_budget = 20'000'000;
};

struct LcsResult {
  std::size_t length = 0;
  Path witness;       // target walk realizing `length`
  bool exact = true;  // false if the expansion budget ran out
};

// Longest common subsequence of equivalent blocks between a query path and
// any walk of the target that starts at one of `starts` (all nodes when
// empty) and respects the visit limit. Exact: dynamic-programming bounds
// over (target node, query prefix) prune a best-first depth-first search
// of the bounded walks, which ends as soon as the unbounded optimum is
// reached. Throws kEmptyPath.
LcsResult LcsPathVsGraph(const Path& query, const Cfg& target,
                         const SebbMatrix& sebb, std::span<const NodeId> starts,
                         const LcsOptions& options = {});

struct PathScore {
  double score = 0.0;  // lcs / |query|
  std::size_t lcs = 0;
  Path witness;
};

PathScore ScorePath(const Path& query, const Cfg& target,
                    const SebbMatrix& sebb, std::span<const NodeId> starts,
                    const LcsOptions& options = {});

struct StartCandidates {
  NodeId query_node = 0;
  std::vector<Match> targets;
};

// First query node, in ordinal order, for which the store holds at least one
// block with similarity >= threshold. Tries at most max_blocks_tried nodes
// (0 = all).
std::optional<StartCandidates> FindStartCandidates(
    std::span<const BlockEmbedding> query, const LshIndex& store,
    double threshold, QueryMode mode, std::size_t max_blocks_tried = 0);

struct MatchOptions {
  double theta_sebb = 0.5;
  double coverage = 0.8;
  QueryMode mode = QueryMode::kApprox;
  std::size_t max_blocks_tried = 0;
  LcsOptions lcs;
  std::size_t jobs = 1;  // path scoring workers
};

struct PathReport {
  Path query_path;
  PathScore score;
};

struct ComponentReport {
  double score = 0.0;
  std::optional<StartCandidates> start;
  std::vector<PathReport> paths;
  double seconds = 0.0;
};

// Path-length-weighted mean of the path scores of the query's linearly
// independent paths, rooted at the first query block with equivalent
// candidates in the store. The store refs must be target node ordinals.
// Zero when no start candidate exists.
ComponentReport ComponentScore(const Cfg& query, const Cfg& target,
                               std::span<const BlockEmbedding> query_embeddings,
                               std::span<const BlockEmbedding> target_embeddings,
                               const LshIndex& store,
                               const MatchOptions& options);

// Convenience: embeds both graphs with the encoder and builds an index over
// the target with the given LSH parameters.
ComponentReport ComponentScore(const Cfg& query, const Cfg& target,
                               const EncoderParams& params,
                               const InstructionEmbedder& embedder,
                               const MatchOptions& options,
                               std::size_t lsh_tables = LshIndex::kDefaultTables,
                               std::size_t lsh_bits = LshIndex::kDefaultBits,
                               std::uint64_t lsh_seed = 1);

std::vector<BlockEmbedding> EmbedCfg(const Cfg& g, const EncoderParams& params,
                                     const InstructionEmbedder& embedder);

nlohmann::json ReportToJson(const ComponentReport& report,
                            bool include_timing = true);

}  // namespace xasm

#endif  // XASM_MATCHER_HPP_
