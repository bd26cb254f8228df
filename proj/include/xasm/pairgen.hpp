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

#ifndef XASM_PAIRGEN_HPP_
#define XASM_PAIRGEN_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "xasm/corpus.hpp"

namespace xasm {

struct BlockPair {
  BasicBlock a;
  BasicBlock b;  // b.arch != a.arch
  int label = 0;  // 1 similar, 0 dissimilar

  friend bool operator==(const BlockPair&, const BlockPair&) = default;
};

// Multiset Jaccard similarity of the token n-grams of two same-arch,
// same-opt blocks. A block shorter than n is a single gram. Throws
// kArchMismatch, kOptMismatch, kInvalidArgument (n == 0).
double NgramSimilarity(const BasicBlock& a, const BasicBlock& b,
                       std::size_t n);

// Pairs every block of cx with the cy blocks carrying the same provenance
// id (and the same opt level). Pairs with identical text are emitted once.
std::vector<BlockPair> GenerateSimilarPairs(const Corpus& cx,
                                            const Corpus& cy);

struct DissimilarOptions {
  std::size_t n = 4;
  double threshold = 0.5;
  std::uint64_t seed = 1;
  // Number of pairs to emit, typically the similar-pair count.
  std::size_t count = 0;
  // Sampling attempts allowed per requested pair before giving up.
  std::size_t attempts_per_pair = 200;
};

struct DissimilarPairs {
  std::vector<BlockPair> pairs;
  // witnesses[i] is the cx block equivalent to pairs[i].a whose n-gram
  // score against pairs[i].b was below the threshold.
  std::vector<BasicBlock> witnesses;
};

// Emits <B1^Y, B2^X, 0> where B1^X ~ B1^Y share an id and
// NgramSimilarity(B1^X, B2^X) < threshold.
DissimilarPairs GenerateDissimilarPairs(const Corpus& cx, const Corpus& cy,
                                        const DissimilarOptions& options);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitSet {
  std::vector<BlockPair> train;
  std::vector<BlockPair> val;
  std::vector<BlockPair> test;
  SplitFractions fractions;
  std::size_t dropped = 0;  // pairs whose endpoints fell in different sets
  // Pairs removed so that each split's positive fraction stays within 0.05
  // of the input's.
  std::size_t rebalanced = 0;
};

// Partitions provenance groups (opt, id) into three disjoint sets first and
// then keeps each pair whose endpoints land in the same set. Groups linked
// by a pair are kept in one set, so with the built-in partition no pair
// straddles. Throws kBadFractions.
// A split whose positive fraction drifts by more than 0.05 from the input's
// loses randomly chosen pairs of the over-represented label until it is
// back within 0.05.
SplitSet SplitDataset(const std::vector<BlockPair>& pairs,
                      const SplitFractions& fractions, std::uint64_t seed);

// JSON-lines: {"a": <block record+arch+opt>, "b": ..., "label": 0|1}
void WritePairs(const std::vector<BlockPair>& pairs, std::ostream& out);
std::vector<BlockPair> ReadPairs(std::istream& in,
                                 const ParseOptions& options = {});
std::vector<BlockPair> ReadPairsFile(const std::filesystem::path& path);

}  // namespace xasm

#endif  // XASM_PAIRGEN_HPP_
