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

#include "xasm/pairgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "xasm/error.hpp"
#include "xasm/rng.hpp"

namespace xasm {

namespace {

using Gram = std::vector<std::string_view>;

std::map<Gram, std::size_t> Grams(const BasicBlock& block, std::size_t n) {
  std::map<Gram, std::size_t> grams;
  const auto& s = block.instrs;
  if (s.size() < n) {
    grams[Gram(s.begin(), s.end())] += 1;
    return grams;
  }
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    grams[Gram(s.begin() + static_cast<std::ptrdiff_t>(i),
               s.begin() + static_cast<std::ptrdiff_t>(i + n))] += 1;
  }
  return grams;
}

std::string PairKey(const BasicBlock& a, const BasicBlock& b) {
  std::string key;
  for (const auto* block : {&a, &b}) {
    key += ArchName(block->arch);
    key += '\x1f';
    key += OptName(block->opt);
    for (const auto& instr : block->instrs) {
      key += '\x1f';
      key += instr;
    }
    key += '\x1e';
  }
  return key;
}

using GroupKey = std::pair<Opt, std::uint32_t>;

}  // namespace

double NgramSimilarity(const BasicBlock& a, const BasicBlock& b,
                       std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  if (a.arch != b.arch) {
    throw Error(ErrorCode::kArchMismatch, "n-grams compare within one arch");
  }
  if (a.opt != b.opt) {
    throw Error(ErrorCode::kOptMismatch, "n-grams compare within one opt level");
  }
  const auto ga = Grams(a, n);
  const auto gb = Grams(b, n);
  std::size_t inter = 0;
  std::size_t uni = 0;
  auto ia = ga.begin();
  auto ib = gb.begin();
  while (ia != ga.end() || ib != gb.end()) {
    if (ib == gb.end() || (ia != ga.end() && ia->first < ib->first)) {
      uni += ia->second;
      ++ia;
    } else if (ia == ga.end() || ib->first < ia->first) {
      uni += ib->second;
      ++ib;
    } else {
      inter += std::min(ia->second, ib->second);
      uni += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<BlockPair> GenerateSimilarPairs(const Corpus& cx,
                                            const Corpus& cy) {
  std::map<GroupKey, std::vector<const BasicBlock*>> by_id;
  for (const auto* block : cy.Blocks()) {
    by_id[{block->opt, block->id}].push_back(block);
  }
  std::vector<BlockPair> out;
  std::set<std::string> seen;
  for (const auto* bx : cx.Blocks()) {
    auto it = by_id.find({bx->opt, bx->id});
    if (it == by_id.end()) continue;
    for (const auto* by : it->second) {
      if (by->arch == bx->arch) continue;
      if (!seen.insert(PairKey(*bx, *by)).second) continue;
      out.push_back({*bx, *by, 1});
    }
  }
  return out;
}

DissimilarPairs GenerateDissimilarPairs(const Corpus& cx, const Corpus& cy,
                                        const DissimilarOptions& options) {
  DissimilarPairs out;
  if (options.count == 0) return out;

  std::map<GroupKey, std::vector<const BasicBlock*>> equivalents;
  for (const auto* block : cy.Blocks()) {
    equivalents[{block->opt, block->id}].push_back(block);
  }
  std::vector<const BasicBlock*> anchors;
  std::map<Opt, std::vector<const BasicBlock*>> by_opt;
  for (const auto* block : cx.Blocks()) {
    by_opt[block->opt].push_back(block);
    auto it = equivalents.find({block->opt, block->id});
    if (it == equivalents.end()) continue;
    const bool cross = std::any_of(
        it->second.begin(), it->second.end(),
        [&](const BasicBlock* b) { return b->arch != block->arch; });
    if (cross) anchors.push_back(block);
  }
  if (anchors.empty()) return out;

  Rng rng(options.seed);
  std::set<std::string> seen;
  const std::size_t budget = options.count * options.attempts_per_pair;
  for (std::size_t attempt = 0;
       attempt < budget && out.pairs.size() < options.count; ++attempt) {
    const BasicBlock* b1x = anchors[rng.Below(anchors.size())];
    const auto& pool = by_opt[b1x->opt];
    const BasicBlock* b2x = pool[rng.Below(pool.size())];
    if (b2x->id == b1x->id) continue;
    if (NgramSimilarity(*b1x, *b2x, options.n) >= options.threshold) continue;
    const auto& twins = equivalents[{b1x->opt, b1x->id}];
    const BasicBlock* b1y = twins[rng.Below(twins.size())];
    if (b1y->arch == b2x->arch) continue;
    if (!seen.insert(PairKey(*b1y, *b2x)).second) continue;
    out.pairs.push_back({*b1y, *b2x, 0});
    out.witnesses.push_back(*b1x);
  }
  return out;
}

SplitSet SplitDataset(const std::vector<BlockPair>& pairs,
                      const SplitFractions& fractions, std::uint64_t seed) {
  const double sum = fractions.train + fractions.val + fractions.test;
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kBadFractions,
                "fractions must be nonnegative and sum to 1");
  }

  // Provenance groups joined by a pair form one cluster; whole clusters are
  // dealt to the split furthest below its share of pairs, largest first.
  std::map<GroupKey, std::size_t> group_index;
  for (const auto& p : pairs) {
    for (const auto* block : {&p.a, &p.b}) {
      group_index.emplace(GroupKey{block->opt, block->id}, group_index.size());
    }
  }
  std::vector<std::size_t> parent(group_index.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& p : pairs) {
    const auto ra = find(group_index[{p.a.opt, p.a.id}]);
    const auto rb = find(group_index[{p.b.opt, p.b.id}]);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::size_t> weight(parent.size(), 0);
  for (const auto& p : pairs) ++weight[find(group_index[{p.a.opt, p.a.id}])];

  std::vector<std::size_t> clusters;
  for (std::size_t g = 0; g < parent.size(); ++g) {
    if (find(g) == g) clusters.push_back(g);
  }
  Rng rng(seed);
  rng.Shuffle(clusters);
  std::stable_sort(clusters.begin(), clusters.end(),
                   [&weight](std::size_t a, std::size_t b) {
                     return weight[a] > weight[b];
                   });
  const std::array<double, 3> share = {fractions.train, fractions.val,
                                       fractions.test};
  std::array<double, 3> filled = {0, 0, 0};
  std::vector<int> cluster_split(parent.size(), 0);
  const auto total = static_cast<double>(pairs.size());
  for (std::size_t c : clusters) {
    int best = -1;
    double best_deficit = 0.0;
    for (int s = 0; s < 3; ++s) {
      if (share[s] <= 0.0) continue;
      const double deficit = share[s] * total - filled[s];
      if (best < 0 || deficit > best_deficit) {
        best = s;
        best_deficit = deficit;
      }
    }
    cluster_split[c] = best;
    filled[best] += static_cast<double>(weight[c]);
  }
  std::map<GroupKey, int> split_of;
  for (const auto& [key, index] : group_index) {
    split_of[key] = cluster_split[find(index)];
  }

  SplitSet out;
  out.fractions = fractions;
  for (const auto& p : pairs) {
    const int sa = split_of[{p.a.opt, p.a.id}];
    const int sb = split_of[{p.b.opt, p.b.id}];
    if (sa != sb) {
      ++out.dropped;
      continue;
    }
    (sa == 0 ? out.train : sa == 1 ? out.val : out.test).push_back(p);
  }

  const auto positives = static_cast<double>(std::count_if(
      pairs.begin(), pairs.end(), [](const BlockPair& p) { return p.label == 1; }));
  const double target = pairs.empty() ? 0.0 : positives / static_cast<double>(pairs.size());
  constexpr double kTolerance = 0.05;
  for (auto* split : {&out.train, &out.val, &out.test}) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < split->size(); ++i) {
      ((*split)[i].label == 1 ? pos : neg).push_back(i);
    }
    auto fraction = [&] {
      return static_cast<double>(pos.size()) /
             static_cast<double>(pos.size() + neg.size());
    };
    if (split->empty()) continue;
    rng.Shuffle(pos);
    rng.Shuffle(neg);
    std::vector<bool> keep(split->size(), true);
    while (fraction() > target + kTolerance && !pos.empty()) {
      keep[pos.back()] = false;
      pos.pop_back();
    }
    while (fraction() < target - kTolerance && !neg.empty()) {
      keep[neg.back()] = false;
      neg.pop_back();
    }
    std::vector<BlockPair> kept;
    for (std::size_t i = 0; i < split->size(); ++i) {
      if (keep[i]) kept.push_back(std::move((*split)[i]));
    }
    out.rebalanced += split->size() - kept.size();
    *split = std::move(kept);
  }
  return out;
}

void WritePairs(const std::vector<BlockPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) {
    nlohmann::json j;
    j["a"] = BlockToJson(p.a, true);
    j["b"] = BlockToJson(p.b, true);
    j["label"] = p.label;
    out << j.dump() << '\n';
  }
}

std::vector<BlockPair> ReadPairs(std::istream& in,
                                 const ParseOptions& options) {
  std::vector<BlockPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.contains("a") || !j.contains("b") || !j.contains("label") ||
          !j["label"].is_number_integer()) {
        throw Error(ErrorCode::kMalformedRecord, "pair needs a, b and label");
      }
      for (const char* side : {"a", "b"}) {
        if (!j[side].contains("arch") || !j[side].contains("opt")) {
          throw Error(ErrorCode::kMalformedRecord,
                      "pair blocks must carry arch and opt");
        }
      }
      BlockPair p;
      p.a = BlockFromJson(j["a"], Arch::kX86_64, Opt::kO2, options);
      p.b = BlockFromJson(j["b"], Arch::kX86_64, Opt::kO2, options);
      p.label = j["label"].get<int>();
      if (p.label != 0 && p.label != 1) {
        throw Error(ErrorCode::kMalformedRecord, "label must be 0 or 1");
      }
      if (p.a.arch == p.b.arch) {
        throw Error(ErrorCode::kMalformedRecord,
                    "pair blocks must come from different architectures");
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<BlockPair> ReadPairsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadPairs(in);
}

}  // namespace xasm
