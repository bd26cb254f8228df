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

#ifndef XASM_ENCODER_HPP_
#define XASM_ENCODER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "xasm/corpus.hpp"
#include "xasm/instr_embed.hpp"
#include "xasm/pairgen.hpp"

namespace xasm {

enum class CellType { kLstm, kGru, kRnn };

std::string_view CellName(CellType cell);  // "lstm" | "gru" | "rnn"
CellType ParseCell(std::string_view name);

// How the LSTM memory is updated. kStandard: c = i*g + f*c_prev.
// kPrinted: c = i*g + f*g, which never reads c_prev; kept only so the two
// readings of the update can be compared.
enum class LstmUpdate { kStandard, kPrinted };

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t input_dim = 100;
  std::size_t block_dim = 50;
  CellType cell = CellType::kLstm;
  LstmUpdate lstm_update = LstmUpdate::kStandard;
  double lr = 0.05;
  std::size_t epochs = 100;
  // Stop when validation AUC has not improved for this many epochs.
  std::size_t patience = 20;
  std::uint64_t seed = 1;
  // Tower t encodes blocks of architecture tower_arch[t].
  std::array<Arch, 2> tower_arch = {Arch::kX86_64, Arch::kArm};

  std::size_t GateCount() const;
};

// One recurrent layer. Gate blocks are stacked row-wise:
//   LSTM [input; forget; candidate; output], GRU [update; reset; candidate],
//   RNN  [candidate].
// w is (gates*block_dim x input), u is (gates*block_dim x block_dim).
struct LayerParams {
  Eigen::MatrixXd w;
  Eigen::MatrixXd u;
  Eigen::VectorXd bias;
};

struct Tower {
  std::vector<LayerParams> layers;
};

struct EncoderParams {
  EncoderConfig config;
  std::array<Tower, 2> towers;

  std::size_t ParameterCount() const;
  // Visits every scalar parameter in file order: tower, layer, w, u, bias
  // (matrices row-major).
  template <typename Fn>
  void ForEach(Fn&& fn);
  template <typename Fn>
  void ForEach(Fn&& fn) const;

  int TowerFor(Arch arch) const;  // throws kArchMismatch
};

struct BlockEmbedding {
  Arch arch = Arch::kX86_64;
  Eigen::VectorXd vector;
};

// Column t is the instruction embedding at step t.
using Sequence = Eigen::MatrixXd;

// Throws kBadConfig.
EncoderParams InitParams(const EncoderConfig& config);

// Final hidden state of the last layer. Throws kEmptySequence, kDimMismatch.
Eigen::VectorXd EncodeSequence(const EncoderParams& params, int tower,
                               const Sequence& seq);

// exp(-||e1 - e2||_1), in (0, 1]. Throws kDimMismatch.
double Similarity(const Eigen::VectorXd& e1, const Eigen::VectorXd& e2);
double Similarity(const BlockEmbedding& e1, const BlockEmbedding& e2);

// Maps blocks to instruction-embedding sequences, one matrix per arch. OOV
// instructions become zero columns.
class InstructionEmbedder {
 public:
  InstructionEmbedder() = default;
  InstructionEmbedder(const EmbeddingMatrix* x86, const EmbeddingMatrix* arm);

  Sequence Embed(const BasicBlock& block) const;
  std::size_t dim() const;

 private:
  const EmbeddingMatrix* matrices_[2] = {nullptr, nullptr};
};

// A labeled pair with its inputs already mapped to towers and sequences.
struct EncodedPair {
  int tower_a = 0;
  Sequence a;
  int tower_b = 1;
  Sequence b;
  double label = 0.0;
  std::size_t size_a = 0;  // instruction counts, for size bucketing
  std::size_t size_b = 0;
};

EncodedPair EncodePair(const EncoderParams& params,
                       const InstructionEmbedder& embedder,
                       const BlockPair& pair);
std::vector<EncodedPair> EncodePairs(const EncoderParams& params,
                                     const InstructionEmbedder& embedder,
                                     const std::vector<BlockPair>& pairs);

// Block embedding through the tower assigned to block.arch.
BlockEmbedding EmbedBlock(const EncoderParams& params,
                          const InstructionEmbedder& embedder,
                          const BasicBlock& block);

double PairSimilarity(const EncoderParams& params, const EncodedPair& pair);

// Sum over the batch of (label - similarity)^2. Throws kEmptyBatch.
double PairLoss(const EncoderParams& params,
                const std::vector<EncodedPair>& batch);

// Loss of one pair; when grad is non-null it is overwritten with the
// gradient of that loss (same shapes as params).
double PairLossAndGradient(const EncoderParams& params,
                           const EncodedPair& pair, EncoderParams* grad);

struct EpochRecord {
  double loss = 0.0;     // mean per-pair training loss
  double val_auc = 0.0;
};

struct TrainResult {
  EncoderParams best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_val_auc = 0.0;
};

// Plain per-pair SGD; keeps the parameters of the best-validation-AUC
// epoch. Throws kEmptyDataset.
TrainResult Train(const EncoderParams& initial,
                  const std::vector<EncodedPair>& train,
                  const std::vector<EncodedPair>& val);

double ValidationAuc(const EncoderParams& params,
                     const std::vector<EncodedPair>& pairs);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // |analytic| + |numeric| < 1e-12
};

// Central finite differences of the pair loss against every parameter. The
// error of each parameter is |a - n| / max(|a|, |n|, 1e-6).
GradientCheckReport GradientCheck(const EncoderParams& params,
                                  const EncodedPair& pair, double eps);

// "XENC", u32 version, u32 header fields (layers, input_dim, block_dim, cell,
// lstm_update, tower_arch[0], tower_arch[1]), then every parameter as f32
// in ForEach order. All little-endian.
void WriteParams(const EncoderParams& params, std::ostream& out);
EncoderParams ReadParams(std::istream& in);
void SaveParams(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams LoadParams(const std::filesystem::path& path);

nlohmann::json ConfigToJson(const EncoderConfig& config);

template <typename Fn>
void EncoderParams::ForEach(Fn&& fn) {
  for (auto& tower : towers) {
    for (auto& layer : tower.layers) {
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.w.cols(); ++c) fn(layer.w(r, c));
      for (Eigen::Index r = 0; r < layer.u.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.u.cols(); ++c) fn(layer.u(r, c));
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) fn(layer.bias(r));
    }
  }
}

template <typename Fn>
void EncoderParams::ForEach(Fn&& fn) const {
  const_cast<EncoderParams*>(this)->ForEach(
      [&fn](double& v) { fn(static_cast<const double&>(v)); });
}

}  // namespace xasm

#endif  // XASM_ENCODER_HPP_
