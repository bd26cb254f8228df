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

#include "xasm/matcher.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "xasm/error.hpp"

namespace xasm {

std::vector<Path> LinearlyIndependentPaths(const Cfg& g, double coverage,
                                           std::optional<NodeId> start) {
  const NodeId root = start.value_or(g.entry());
  if (root >= g.size()) {
    throw Error(ErrorCode::kInvalidArgument, "start node out of range");
  }
  const auto reachable = g.ReachableFrom(root);
  const auto total = static_cast<std::size_t>(
      std::count(reachable.begin(), reachable.end(), true));
  const auto needed = static_cast<std::size_t>(
      std::ceil(std::clamp(coverage, 0.0, 1.0) * static_cast<double>(total) - 1e-9));

  std::vector<Path> paths;
  std::vector<bool> covered(g.size(), false);
  std::size_t covered_count = 0;
  std::vector<std::uint8_t> visits(g.size(), 0);
  Path walk;
  bool done = needed == 0;
  std::size_t walks_seen = 0;
  constexpr std::size_t kMaxWalks = 1'000'000;

  auto dfs = [&](auto&& self, NodeId v) -> void {
    walk.push_back(v);
    ++visits[v];
    bool extended = false;
    for (NodeId u : g.successors(v)) {
      if (visits[u] >= 2) continue;
      extended = true;
      self(self, u);
      if (done) break;
    }
    if (!extended && !done) {
      if (++walks_seen >= kMaxWalks) done = true;
      const bool fresh = std::any_of(walk.begin(), walk.end(),
                                     [&](NodeId n) { return !covered[n]; });
      if (fresh) {
        paths.push_back(walk);
        for (NodeId n : walk) {
          if (!covered[n]) {
            covered[n] = true;
            ++covered_count;
          }
        }
        if (covered_count >= needed) done = true;
      }
    }
    --visits[v];
    walk.pop_back();
  };
  if (!done) dfs(dfs, root);
  return paths;
}

SebbMatrix TextEqualitySebb(const Cfg& query, const Cfg& target) {
  SebbMatrix m(query.size(), target.size());
  for (NodeId q = 0; q < query.size(); ++q) {
    for (NodeId t = 0; t < target.size(); ++t) {
      m.Set(q, t, query.node(q).instrs == target.node(t).instrs);
    }
  }
  return m;
}

SebbMatrix EmbeddingSebb(std::span<const BlockEmbedding> query,
                         std::span<const BlockEmbedding> target,
                         double threshold) {
  SebbMatrix m(query.size(), target.size());
  for (NodeId q = 0; q < query.size(); ++q) {
    for (NodeId t = 0; t < target.size(); ++t) {
      m.Set(q, t, Similarity(query[q], target[t]) >= threshold);
    }
  }
  return m;
}

bool IsSebb(const EncoderParams& params, const InstructionEmbedder& embedder,
            const BasicBlock& a, const BasicBlock& b, double threshold) {
  return Similarity(EmbedBlock(params, embedder, a),
                    EmbedBlock(params, embedder, b)) >= threshold;
}

namespace {

using Row = std::vector<std::uint32_t>;

class WalkSearch {
 public:
  WalkSearch(const Path& query, const Cfg& target, const SebbMatrix& sebb,
             const LcsOptions& options)
      : query_(query),
        target_(target),
        sebb_(sebb),
        options_(options),
        m_(query.size()),
        n_(target.size()) {
    ComputeSuffixBounds();
  }

  LcsResult Run(std::span<const NodeId> starts) {
    std::vector<NodeId> roots(starts.begin(), starts.end());
    if (roots.empty()) {
      for (NodeId v = 0; v < n_; ++v) roots.push_back(v);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

    std::uint32_t optimum = 0;
    for (NodeId s : roots) optimum = std::max(optimum, Suffix(s, 0));
    optimum_ = optimum;
    if (optimum == 0) return result_;

    const Row empty(m_ + 1, 0);
    std::vector<std::pair<Row, NodeId>> ordered;
    for (NodeId s : roots) ordered.emplace_back(Extend(empty, s), s);
    SortByBound(&ordered);
    visits_.assign(n_, 0);
    for (const auto& [row, s] : ordered) {
      if (Finished() || Bound(row, s) <= result_.length) continue;
      Explore(s, row);
    }
    return result_;
  }

 private:
  std::uint32_t Suffix(NodeId v, std::size_t j) const {
    return suffix_[v * (m_ + 1) + j];
  }
  std::uint32_t& Suffix(NodeId v, std::size_t j) {
    return suffix_[v * (m_ + 1) + j];
  }
  std::uint32_t AfterSuffix(NodeId v, std::size_t j) const {
    return after_[v * (m_ + 1) + j];
  }

  // suffix(v, j): best LCS of query[j..] against any unbounded walk starting
  // at v. after(v, j): the same over walks starting at a successor of v,
  // or 0.
  void ComputeSuffixBounds() {
    suffix_.assign(n_ * (m_ + 1), 0);
    after_.assign(n_ * (m_ + 1), 0);
    for (std::size_t j = m_; j-- > 0;) {
      for (NodeId v = 0; v < n_; ++v) {
        std::uint32_t next = 0;
        for (NodeId u : target_.successors(v)) next = std::max(next, Suffix(u, j + 1));
        const std::uint32_t match = sebb_(query_[j], v) ? 1 + next : 0;
        Suffix(v, j) = std::max(Suffix(v, j + 1), match);
      }
      // Close over descendants: suffix(v, j) >= suffix(u, j) for v -> u.
      std::vector<NodeId> work;
      for (NodeId v = 0; v < n_; ++v) work.push_back(v);
      while (!work.empty()) {
        const NodeId u = work.back();
        work.pop_back();
        for (NodeId v : target_.predecessors(u)) {
          if (Suffix(v, j) < Suffix(u, j)) {
            Suffix(v, j) = Suffix(u, j);
            work.push_back(v);
          }
        }
      }
    }
    for (NodeId v = 0; v < n_; ++v) {
      for (std::size_t j = 0; j <= m_; ++j) {
        std::uint32_t best = 0;
        for (NodeId u : target_.successors(v)) best = std::max(best, Suffix(u, j));
        after_[v * (m_ + 1) + j] = best;
      }
    }
  }

  // LCS row of walk+v against every query prefix, given the row of walk.
  Row Extend(const Row& row, NodeId v) const {
    Row out(m_ + 1, 0);
    for (std::size_t j = 1; j <= m_; ++j) {
      const std::uint32_t diag = row[j - 1] + (sebb_(query_[j - 1], v) ? 1 : 0);
      out[j] = std::max({row[j], out[j - 1], diag});
    }
    return out;
  }

  // Upper bound on the LCS of any extension of a walk ending at v.
  std::uint32_t Bound(const Row& row, NodeId v) const {
    std::uint32_t bound = 0;
    for (std::size_t j = 0; j <= m_; ++j) {
      bound = std::max(bound, row[j] + AfterSuffix(v, j));
    }
    return bound;
  }

  void SortByBound(std::vector<std::pair<Row, NodeId>>* items) const {
    std::stable_sort(items->begin(), items->end(),
                     [this](const auto& a, const auto& b) {
                       const auto ba = Bound(a.first, a.second);
                       const auto bb = Bound(b.first, b.second);
                       if (ba != bb) return ba > bb;
                       return a.second < b.second;
                     });
  }

  bool Finished() const {
    return result_.length == optimum_ || !result_.exact;
  }

  void Explore(NodeId v, const Row& row) {
    if (++expansions_ > options_.expansion_budget) {
      result_.exact = false;
      return;
    }
    walk_.push_back(v);
    ++visits_[v];
    if (row[m_] > result_.length) {
      result_.length = row[m_];
      result_.witness = walk_;
    }
    if (!Finished() && Bound(row, v) > result_.length) {
      std::vector<std::pair<Row, NodeId>> children;
      for (NodeId u : target_.successors(v)) {
        if (visits_[u] < options_.node_visit_limit) {
          children.emplace_back(Extend(row, u), u);
        }
      }
      SortByBound(&children);
      for (const auto& [child_row, u] : children) {
        if (Finished()) break;
        if (Bound(child_row, u) <= result_.length) continue;
        Explore(u, child_row);
      }
    }
    --visits_[v];
    walk_.pop_back();
  }

  const Path& query_;
  const Cfg& target_;
  const SebbMatrix& sebb_;
  const LcsOptions& options_;
  std::size_t m_;
  std::size_t n_;
  std::vector<std::uint32_t> suffix_;
  std::vector<std::uint32_t> after_;
  std::uint32_t optimum_ = 0;
  std::vector<std::size_t> visits_;
  Path walk_;
  std::size_t expansions_ = 0;
  LcsResult result_;
};

}  // namespace

LcsResult LcsPathVsGraph(const Path& query, const Cfg& target,
                         const SebbMatrix& sebb, std::span<const NodeId> starts,
                         const LcsOptions& options) {
  if (query.empty()) throw Error(ErrorCode::kEmptyPath, "empty query path");
  if (options.node_visit_limit == 0) {
    throw Error(ErrorCode::kInvalidArgument, "node_visit_limit must be positive");
  }
  for (NodeId q : query) {
    if (q >= sebb.query_nodes()) {
      throw Error(ErrorCode::kInvalidArgument, "query node outside SEBB table");
    }
  }
  if (sebb.target_nodes() != target.size()) {
    throw Error(ErrorCode::kDimMismatch, "SEBB table does not fit the target");
  }
  for (NodeId s : starts) {
    if (s >= target.size()) {
      throw Error(ErrorCode::kInvalidArgument, "start node out of range");
    }
  }
  return WalkSearch(query, target, sebb, options).Run(starts);
}

PathScore ScorePath(const Path& query, const Cfg& target,
                    const SebbMatrix& sebb, std::span<const NodeId> starts,
                    const LcsOptions& options) {
  LcsResult lcs = LcsPathVsGraph(query, target, sebb, starts, options);
  return {static_cast<double>(lcs.length) / static_cast<double>(query.size()),
          lcs.length, std::move(lcs.witness)};
}

std::optional<StartCandidates> FindStartCandidates(
    std::span<const BlockEmbedding> query, const LshIndex& store,
    double threshold, QueryMode mode, std::size_t max_blocks_tried) {
  const std::size_t limit =
      max_blocks_tried == 0 ? query.size()
                            : std::min(query.size(), max_blocks_tried);
  for (std::size_t q = 0; q < limit; ++q) {
    auto matches = store.Query(query[q].vector, threshold, mode);
    if (!matches.empty()) {
      return StartCandidates{static_cast<NodeId>(q), std::move(matches)};
    }
  }
  return std::nullopt;
}

ComponentReport ComponentScore(const Cfg& query, const Cfg& target,
                               std::span<const BlockEmbedding> query_embeddings,
                               std::span<const BlockEmbedding> target_embeddings,
                               const LshIndex& store,
                               const MatchOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (query_embeddings.size() != query.size() ||
      target_embeddings.size() != target.size()) {
    throw Error(ErrorCode::kDimMismatch, "one embedding per CFG node needed");
  }
  ComponentReport report;
  report.start = FindStartCandidates(query_embeddings, store, options.theta_sebb,
                                     options.mode, options.max_blocks_tried);
  if (report.start) {
    std::vector<NodeId> starts;
    for (const auto& match : report.start->targets) {
      if (match.ref >= target.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "store ref is not a target node ordinal");
      }
      starts.push_back(static_cast<NodeId>(match.ref));
    }
    const SebbMatrix sebb =
        EmbeddingSebb(query_embeddings, target_embeddings, options.theta_sebb);
    const auto paths = LinearlyIndependentPaths(query, options.coverage,
                                                report.start->query_node);
    report.paths.resize(paths.size());
    auto score_range = [&](std::size_t first, std::size_t last) {
      for (std::size_t i = first; i < last; ++i) {
        report.paths[i] = {paths[i],
                           ScorePath(paths[i], target, sebb, starts, options.lcs)};
      }
    };
    const std::size_t jobs = std::max<std::size_t>(
        1, std::min(options.jobs, paths.size()));
    if (jobs == 1) {
      score_range(0, paths.size());
    } else {
      std::vector<std::thread> workers;
      for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back(score_range, paths.size() * w / jobs,
                             paths.size() * (w + 1) / jobs);
      }
      for (auto& w : workers) w.join();
    }
    double weighted = 0.0;
    double total = 0.0;
    for (const auto& p : report.paths) {
      const auto len = static_cast<double>(p.query_path.size());
      weighted += len * p.score.score;
      total += len;
    }
    report.score = total > 0.0 ? weighted / total : 0.0;
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

std::vector<BlockEmbedding> EmbedCfg(const Cfg& g, const EncoderParams& params,
                                     const InstructionEmbedder& embedder) {
  std::vector<BlockEmbedding> out;
  out.reserve(g.size());
  for (const auto& node : g.nodes()) out.push_back(EmbedBlock(params, embedder, node));
  return out;
}

ComponentReport ComponentScore(const Cfg& query, const Cfg& target,
                               const EncoderParams& params,
                               const InstructionEmbedder& embedder,
                               const MatchOptions& options,
                               std::size_t lsh_tables, std::size_t lsh_bits,
                               std::uint64_t lsh_seed) {
  const auto query_embeddings = EmbedCfg(query, params, embedder);
  const auto target_embeddings = EmbedCfg(target, params, embedder);
  std::vector<StoredBlock> items;
  for (NodeId t = 0; t < target.size(); ++t) {
    items.push_back({t, target_embeddings[t].vector});
  }
  const LshIndex store(std::move(items), lsh_tables, lsh_bits, lsh_seed);
  return ComponentScore(query, target, query_embeddings, target_embeddings,
                        store, options);
}

nlohmann::json ReportToJson(const ComponentReport& report,
                            bool include_timing) {
  nlohmann::json j;
  j["score"] = report.score;
  if (report.start) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& m : report.start->targets) {
      targets.push_back({{"ref", m.ref}, {"similarity", m.similarity}});
    }
    j["start"] = {{"query_node", report.start->query_node},
                  {"targets", targets}};
  } else {
    j["start"] = nullptr;
  }
  j["paths"] = nlohmann::json::array();
  for (const auto& p : report.paths) {
    j["paths"].push_back({{"query_path", p.query_path},
                          {"lcs", p.score.lcs},
                          {"score", p.score.score},
                          {"witness", p.score.witness}});
  }
  if (include_timing) j["seconds"] = report.seconds;
  return j;
}

}  // namespace xasm
