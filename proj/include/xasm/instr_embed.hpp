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

#ifndef XASM_INSTR_EMBED_HPP_
#define XASM_INSTR_EMBED_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xasm/corpus.hpp"

namespace xasm {

// Instruction embedding table W (dim x V). Column i, the embedding of
// vocabulary token i, is stored contiguously.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(Arch arch, std::size_t dim, Vocabulary vocab);

  Arch arch() const { return arch_; }
  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_.Size(); }
  const Vocabulary& vocab() const { return vocab_; }

  std::span<float> column(std::size_t i) {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> column(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;

 private:
  Arch arch_ = Arch::kX86_64;
  std::size_t dim_ = 0;
  Vocabulary vocab_;
  std::vector<float> values_;
};

struct SgnsConfig {
  std::size_t dim = 100;
  std::size_t window = 2;      // context radius, never crossing a block
  std::size_t negatives = 5;
  double subsample = 1e-5;     // 0 disables subsampling
  std::uint64_t min_count = 0;
  std::size_t epochs = 100;
  double lr = 0.025;           // decays linearly to lr * 1e-4
  std::uint64_t seed = 1;
  // 1 is the deterministic reference mode. More workers update the shared
  // tables without locks and are not reproducible.
  std::size_t jobs = 1;
};

struct SgnsResult {
  EmbeddingMatrix matrix;
  // Mean negative-sampling loss per (center, context) pair, per epoch.
  std::vector<double> epoch_loss;
  std::uint64_t pairs_trained = 0;
};

// Probability that one occurrence of a token with `count` occurrences out of
// `total` survives subsampling at rate `sample` (word2vec's formula).
double KeepProbability(std::uint64_t count, std::uint64_t total, double sample);

// Trains skip-gram with negative sampling over the blocks of a
// single-architecture corpus. Throws kEmptyCorpus, kZeroVocabulary (nothing
// survives min_count), kArchMismatch, kBadConfig.
SgnsResult TrainSgns(const Corpus& corpus, const SgnsConfig& config);

// Column for in-vocabulary tokens, zeros otherwise.
std::vector<float> Lookup(const EmbeddingMatrix& m, std::string_view token);

struct Neighbor {
  std::string token;
  double cosine = 0.0;
};

// k most cosine-similar tokens to `token`, excluding it; ties broken by
// vocabulary index. Throws kUnknownToken, kInvalidArgument when k >= V.
std::vector<Neighbor> NearestTokens(const EmbeddingMatrix& m,
                                    std::string_view token, std::size_t k);

// Little-endian store: "XASM", u32 version, u32 dim, u32 V, then per token
// (u16 byte length, UTF-8 bytes, dim x f32). Counts are not stored.
void WriteEmbeddingStore(const EmbeddingMatrix& m, std::ostream& out);
EmbeddingMatrix ReadEmbeddingStore(std::istream& in, Arch arch);
void SaveEmbeddingStore(const EmbeddingMatrix& m,
                        const std::filesystem::path& path);
EmbeddingMatrix LoadEmbeddingStore(const std::filesystem::path& path,
                                   Arch arch);

// token<TAB>v1<TAB>...<TAB>vd per line.
void WriteEmbeddingTsv(const EmbeddingMatrix& m, std::ostream& out);

}  // namespace xasm

#endif  // XASM_INSTR_EMBED_HPP_
