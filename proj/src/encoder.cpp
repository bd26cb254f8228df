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

#include "xasm/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "xasm/error.hpp"
#include "xasm/eval.hpp"
#include "xasm/rng.hpp"

namespace xasm {

std::string_view CellName(CellType cell) {
  switch (cell) {
    case CellType::kLstm: return "lstm";
    case CellType::kGru: return "gru";
    case CellType::kRnn: return "rnn";
  }
  return "lstm";
}

CellType ParseCell(std::string_view name) {
  if (name == "lstm") return CellType::kLstm;
  if (name == "gru") return CellType::kGru;
  if (name == "rnn") return CellType::kRnn;
  throw Error(ErrorCode::kBadConfig, "unknown cell '" + std::string(name) + "'");
}

std::size_t EncoderConfig::GateCount() const {
  switch (cell) {
    case CellType::kLstm: return 4;
    case CellType::kGru: return 3;
    case CellType::kRnn: return 1;
  }
  return 1;
}

std::size_t EncoderParams::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& tower : towers) {
    for (const auto& layer : tower.layers) {
      n += static_cast<std::size_t>(layer.w.size() + layer.u.size() +
                                    layer.bias.size());
    }
  }
  return n;
}

int EncoderParams::TowerFor(Arch arch) const {
  for (int t = 0; t < 2; ++t) {
    if (config.tower_arch[t] == arch) return t;
  }
  throw Error(ErrorCode::kArchMismatch,
              "no tower encodes " + std::string(ArchName(arch)));
}

namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd Sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return Sigmoid(v); });
}

Eigen::VectorXd Tanh(const Eigen::VectorXd& x) {
  return x.array().tanh().matrix();
}

void ValidateConfig(const EncoderConfig& config) {
  if (config.layers == 0 || config.input_dim == 0 || config.block_dim == 0) {
    throw Error(ErrorCode::kBadConfig, "layers and dimensions must be positive");
  }
  if (!(config.lr > 0.0)) {
    throw Error(ErrorCode::kBadConfig, "learning rate must be positive");
  }
}

Tower ZeroTower(const EncoderConfig& config) {
  const auto d = static_cast<Eigen::Index>(config.block_dim);
  const auto g = static_cast<Eigen::Index>(config.GateCount()) * d;
  Tower tower;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto in = l == 0 ? static_cast<Eigen::Index>(config.input_dim) : d;
    tower.layers.push_back({Eigen::MatrixXd::Zero(g, in),
                            Eigen::MatrixXd::Zero(g, d),
                            Eigen::VectorXd::Zero(g)});
  }
  return tower;
}

EncoderParams ZeroLike(const EncoderParams& params) {
  EncoderParams out;
  out.config = params.config;
  out.towers = {ZeroTower(params.config), ZeroTower(params.config)};
  return out;
}

// Activations recorded by the forward pass of one layer.
struct LayerCache {
  Eigen::MatrixXd h;      // block_dim x (T+1); column 0 is the zero state
  Eigen::MatrixXd c;      // LSTM memory, same layout as h
  Eigen::MatrixXd gates;  // gates*block_dim x T, post-activation
};

Eigen::VectorXd ForwardTower(const EncoderConfig& config, const Tower& tower,
                             const Sequence& seq,
                             std::vector<LayerCache>* caches) {
  const auto d = static_cast<Eigen::Index>(config.block_dim);
  const Eigen::Index steps = seq.cols();
  caches->resize(tower.layers.size());
  const Eigen::MatrixXd* input = &seq;
  Eigen::MatrixXd below;

  for (std::size_t l = 0; l < tower.layers.size(); ++l) {
    const LayerParams& p = tower.layers[l];
    LayerCache& cache = (*caches)[l];
    cache.h = Eigen::MatrixXd::Zero(d, steps + 1);
    cache.gates.resize(p.w.rows(), steps);
    if (config.cell == CellType::kLstm) cache.c = Eigen::MatrixXd::Zero(d, steps + 1);

    // Input contributions for all steps at once.
    const Eigen::MatrixXd wx = p.w * (*input);
    for (Eigen::Index t = 0; t < steps; ++t) {
      const auto h_prev = cache.h.col(t);
      switch (config.cell) {
        case CellType::kLstm: {
          const Eigen::VectorXd a = wx.col(t) + p.u * h_prev + p.bias;
          const Eigen::VectorXd i = Sigmoid(a.segment(0, d));
          const Eigen::VectorXd f = Sigmoid(a.segment(d, d));
          const Eigen::VectorXd g = Tanh(a.segment(2 * d, d));
          const Eigen::VectorXd o = Sigmoid(a.segment(3 * d, d));
          const Eigen::VectorXd carried =
              config.lstm_update == LstmUpdate::kStandard
                  ? Eigen::VectorXd(cache.c.col(t))
                  : g;
          cache.c.col(t + 1) = i.cwiseProduct(g) + f.cwiseProduct(carried);
          cache.h.col(t + 1) = o.cwiseProduct(Tanh(cache.c.col(t + 1)));
          cache.gates.col(t) << i, f, g, o;
          break;
        }
        case CellType::kGru: {
          const Eigen::VectorXd a_zr = wx.col(t).head(2 * d) +
                                       p.u.topRows(2 * d) * h_prev +
                                       p.bias.head(2 * d);
          const Eigen::VectorXd z = Sigmoid(a_zr.head(d));
          const Eigen::VectorXd r = Sigmoid(a_zr.tail(d));
          const Eigen::VectorXd n =
              Tanh(wx.col(t).tail(d) + p.u.bottomRows(d) * r.cwiseProduct(h_prev) +
                   p.bias.tail(d));
          cache.h.col(t + 1) = (Eigen::VectorXd::Ones(d) - z).cwiseProduct(h_prev) +
                               z.cwiseProduct(n);
          cache.gates.col(t) << z, r, n;
          break;
        }
        case CellType::kRnn: {
          const Eigen::VectorXd n = Tanh(wx.col(t) + p.u * h_prev + p.bias);
          cache.h.col(t + 1) = n;
          cache.gates.col(t) = n;
          break;
        }
      }
    }
    // The layer above reads h without its zero column.
    below = cache.h.rightCols(steps);
    input = &below;
  }
  return caches->back().h.col(steps);
}

// Backpropagates d(loss)/d(final hidden state) through the tower, adding
// parameter gradients into grad.
void BackwardTower(const EncoderConfig& config, const Tower& tower,
                   const Sequence& seq, const std::vector<LayerCache>& caches,
                   const Eigen::VectorXd& d_last, Tower* grad) {
  const auto d = static_cast<Eigen::Index>(config.block_dim);
  const Eigen::Index steps = seq.cols();
  // Gradient w.r.t. each step's output of the current layer.
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(d, steps);
  d_out.col(steps - 1) = d_last;

  for (std::size_t l = tower.layers.size(); l-- > 0;) {
    const LayerParams& p = tower.layers[l];
    LayerParams& g = grad->layers[l];
    const LayerCache& cache = caches[l];
    const Eigen::MatrixXd input =
        l == 0 ? seq : Eigen::MatrixXd(caches[l - 1].h.rightCols(steps));
    Eigen::MatrixXd d_pre(p.w.rows(), steps);  // d(loss)/d(pre-activation)
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(d);

    for (Eigen::Index t = steps; t-- > 0;) {
      const Eigen::VectorXd dh = d_out.col(t) + dh_next;
      const auto h_prev = cache.h.col(t);
      switch (config.cell) {
        case CellType::kLstm: {
          const auto i = cache.gates.col(t).segment(0, d).array();
          const auto f = cache.gates.col(t).segment(d, d).array();
          const auto gc = cache.gates.col(t).segment(2 * d, d).array();
          const auto o = cache.gates.col(t).segment(3 * d, d).array();
          const Eigen::ArrayXd tc = cache.c.col(t + 1).array().tanh();
          const Eigen::ArrayXd dc =
              dh.array() * o * (1.0 - tc.square()) + dc_next.array();
          const Eigen::ArrayXd d_o = dh.array() * tc;
          Eigen::ArrayXd d_i = dc * gc;
          Eigen::ArrayXd d_f;
          Eigen::ArrayXd d_g;
          if (config.lstm_update == LstmUpdate::kStandard) {
            d_f = dc * cache.c.col(t).array();
            d_g = dc * i;
            dc_next = (dc * f).matrix();
          } else {
            d_f = dc * gc;
            d_g = dc * (i + f);
            dc_next.setZero();
          }
          d_pre.col(t) << (d_i * i * (1.0 - i)).matrix(),
              (d_f * f * (1.0 - f)).matrix(),
              (d_g * (1.0 - gc.square())).matrix(),
              (d_o * o * (1.0 - o)).matrix();
          dh_next = p.u.transpose() * d_pre.col(t);
          g.u.noalias() += d_pre.col(t) * h_prev.transpose();
          break;
        }
        case CellType::kGru: {
          const auto z = cache.gates.col(t).segment(0, d).array();
          const auto r = cache.gates.col(t).segment(d, d).array();
          const auto n = cache.gates.col(t).segment(2 * d, d).array();
          const Eigen::ArrayXd d_z = dh.array() * (n - h_prev.array());
          const Eigen::ArrayXd d_n = dh.array() * z;
          Eigen::VectorXd dh_prev = (dh.array() * (1.0 - z)).matrix();
          const Eigen::VectorXd d_an = (d_n * (1.0 - n.square())).matrix();
          const Eigen::VectorXd rh = (r * h_prev.array()).matrix();
          const Eigen::VectorXd d_rh = p.u.bottomRows(d).transpose() * d_an;
          const Eigen::ArrayXd d_r = d_rh.array() * h_prev.array();
          dh_prev += (d_rh.array() * r).matrix();
          const Eigen::VectorXd d_az = (d_z * z * (1.0 - z)).matrix();
          const Eigen::VectorXd d_ar = (d_r * r * (1.0 - r)).matrix();
          d_pre.col(t) << d_az, d_ar, d_an;
          dh_prev += p.u.topRows(2 * d).transpose() * d_pre.col(t).head(2 * d);
          g.u.topRows(2 * d).noalias() +=
              d_pre.col(t).head(2 * d) * h_prev.transpose();
          g.u.bottomRows(d).noalias() += d_an * rh.transpose();
          dh_next = dh_prev;
          break;
        }
        case CellType::kRnn: {
          const auto n = cache.gates.col(t).array();
          d_pre.col(t) = (dh.array() * (1.0 - n.square())).matrix();
          dh_next = p.u.transpose() * d_pre.col(t);
          g.u.noalias() += d_pre.col(t) * h_prev.transpose();
          break;
        }
      }
    }
    g.w.noalias() += d_pre * input.transpose();
    g.bias += d_pre.rowwise().sum();
    if (l > 0) d_out = p.w.transpose() * d_pre;
  }
}

void CheckSequence(const EncoderParams& params, const Sequence& seq) {
  if (seq.cols() == 0) throw Error(ErrorCode::kEmptySequence, "empty block");
  if (static_cast<std::size_t>(seq.rows()) != params.config.input_dim) {
    throw Error(ErrorCode::kDimMismatch,
                "instruction embedding has " + std::to_string(seq.rows()) +
                    " dims, encoder expects " +
                    std::to_string(params.config.input_dim));
  }
}

}  // namespace

EncoderParams InitParams(const EncoderConfig& config) {
  ValidateConfig(config);
  EncoderParams params;
  params.config = config;
  Rng rng(config.seed);
  const auto d = static_cast<Eigen::Index>(config.block_dim);
  for (auto& tower : params.towers) {
    tower = ZeroTower(config);
    for (auto& layer : tower.layers) {
      const double w_limit =
          std::sqrt(6.0 / static_cast<double>(layer.w.cols() + d));
      const double u_limit = std::sqrt(6.0 / static_cast<double>(2 * d));
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
          layer.w(r, c) = rng.Uniform(-w_limit, w_limit);
      for (Eigen::Index r = 0; r < layer.u.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.u.cols(); ++c)
          layer.u(r, c) = rng.Uniform(-u_limit, u_limit);
      if (config.cell == CellType::kLstm) layer.bias.segment(d, d).setOnes();
    }
  }
  return params;
}

Eigen::VectorXd EncodeSequence(const EncoderParams& params, int tower,
                               const Sequence& seq) {
  CheckSequence(params, seq);
  std::vector<LayerCache> caches;
  return ForwardTower(params.config, params.towers.at(tower), seq, &caches);
}

double Similarity(const Eigen::VectorXd& e1, const Eigen::VectorXd& e2) {
  if (e1.size() != e2.size()) {
    throw Error(ErrorCode::kDimMismatch, "embeddings differ in length");
  }
  return std::exp(-(e1 - e2).lpNorm<1>());
}

double Similarity(const BlockEmbedding& e1, const BlockEmbedding& e2) {
  return Similarity(e1.vector, e2.vector);
}

InstructionEmbedder::InstructionEmbedder(const EmbeddingMatrix* x86,
                                         const EmbeddingMatrix* arm)
    : matrices_{x86, arm} {
  if (x86 != nullptr && arm != nullptr && x86->dim() != arm->dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "instruction embeddings of both architectures must agree");
  }
}

std::size_t InstructionEmbedder::dim() const {
  for (const auto* m : matrices_) {
    if (m != nullptr) return m->dim();
  }
  return 0;
}

Sequence InstructionEmbedder::Embed(const BasicBlock& block) const {
  const EmbeddingMatrix* m = matrices_[block.arch == Arch::kX86_64 ? 0 : 1];
  if (m == nullptr) {
    throw Error(ErrorCode::kArchMismatch,
                "no instruction embeddings for " +
                    std::string(ArchName(block.arch)));
  }
  Sequence seq = Sequence::Zero(static_cast<Eigen::Index>(m->dim()),
                                static_cast<Eigen::Index>(block.instrs.size()));
  for (std::size_t t = 0; t < block.instrs.size(); ++t) {
    const auto idx = m->vocab().IndexOf(block.instrs[t]);
    if (idx < 0) continue;
    const auto col = m->column(static_cast<std::size_t>(idx));
    for (std::size_t k = 0; k < col.size(); ++k) {
      seq(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = col[k];
    }
  }
  return seq;
}

EncodedPair EncodePair(const EncoderParams& params,
                       const InstructionEmbedder& embedder,
                       const BlockPair& pair) {
  EncodedPair out;
  out.tower_a = params.TowerFor(pair.a.arch);
  out.tower_b = params.TowerFor(pair.b.arch);
  out.a = embedder.Embed(pair.a);
  out.b = embedder.Embed(pair.b);
  out.label = pair.label;
  out.size_a = pair.a.instrs.size();
  out.size_b = pair.b.instrs.size();
  CheckSequence(params, out.a);
  CheckSequence(params, out.b);
  return out;
}

std::vector<EncodedPair> EncodePairs(const EncoderParams& params,
                                     const InstructionEmbedder& embedder,
                                     const std::vector<BlockPair>& pairs) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(EncodePair(params, embedder, p));
  return out;
}

BlockEmbedding EmbedBlock(const EncoderParams& params,
                          const InstructionEmbedder& embedder,
                          const BasicBlock& block) {
  return {block.arch, EncodeSequence(params, params.TowerFor(block.arch),
                                     embedder.Embed(block))};
}

double PairSimilarity(const EncoderParams& params, const EncodedPair& pair) {
  return Similarity(EncodeSequence(params, pair.tower_a, pair.a),
                    EncodeSequence(params, pair.tower_b, pair.b));
}

double PairLoss(const EncoderParams& params,
                const std::vector<EncodedPair>& batch) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  double loss = 0.0;
  for (const auto& pair : batch) {
    const double diff = pair.label - PairSimilarity(params, pair);
    loss += diff * diff;
  }
  return loss;
}

double PairLossAndGradient(const EncoderParams& params,
                           const EncodedPair& pair, EncoderParams* grad) {
  CheckSequence(params, pair.a);
  CheckSequence(params, pair.b);
  std::vector<LayerCache> cache_a;
  std::vector<LayerCache> cache_b;
  const Eigen::VectorXd ha =
      ForwardTower(params.config, params.towers[pair.tower_a], pair.a, &cache_a);
  const Eigen::VectorXd hb =
      ForwardTower(params.config, params.towers[pair.tower_b], pair.b, &cache_b);
  const Eigen::VectorXd delta = ha - hb;
  const double sim = std::exp(-delta.lpNorm<1>());
  const double diff = pair.label - sim;
  if (grad == nullptr) return diff * diff;

  if (grad->towers[0].layers.size() != params.config.layers ||
      grad->config.cell != params.config.cell) {
    *grad = ZeroLike(params);
  } else {
    grad->ForEach([](double& v) { v = 0.0; });
  }
  // dL/dsim = -2 (y - sim); dsim/dha = -sim * sign(ha - hb).
  const Eigen::VectorXd sign =
      delta.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
  const Eigen::VectorXd d_ha = (2.0 * diff * sim) * sign;
  BackwardTower(params.config, params.towers[pair.tower_a], pair.a, cache_a,
                d_ha, &grad->towers[pair.tower_a]);
  BackwardTower(params.config, params.towers[pair.tower_b], pair.b, cache_b,
                -d_ha, &grad->towers[pair.tower_b]);
  return diff * diff;
}

double ValidationAuc(const EncoderParams& params,
                     const std::vector<EncodedPair>& pairs) {
  std::vector<ScoredItem> scored;
  scored.reserve(pairs.size());
  for (const auto& p : pairs) {
    scored.push_back({PairSimilarity(params, p), static_cast<int>(p.label)});
  }
  return RocAuc(scored).auc;
}

TrainResult Train(const EncoderParams& initial,
                  const std::vector<EncodedPair>& train,
                  const std::vector<EncodedPair>& val) {
  if (train.empty() || val.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "training and validation sets needed");
  }
  const EncoderConfig& config = initial.config;
  TrainResult result;
  result.best = initial;
  EncoderParams params = initial;
  EncoderParams grad = ZeroLike(initial);
  Rng rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    double loss = 0.0;
    for (std::size_t idx : order) {
      loss += PairLossAndGradient(params, train[idx], &grad);
      for (int t = 0; t < 2; ++t) {
        for (std::size_t l = 0; l < params.towers[t].layers.size(); ++l) {
          auto& p = params.towers[t].layers[l];
          const auto& g = grad.towers[t].layers[l];
          p.w.noalias() -= config.lr * g.w;
          p.u.noalias() -= config.lr * g.u;
          p.bias.noalias() -= config.lr * g.bias;
        }
      }
    }
    const double auc = ValidationAuc(params, val);
    result.history.push_back({loss / static_cast<double>(train.size()), auc});
    if (result.best_epoch == 0 || auc > result.best_val_auc) {
      result.best = params;
      result.best_epoch = epoch;
      result.best_val_auc = auc;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

constexpr double kGradFloor = 1e-6;

GradientCheckReport GradientCheck(const EncoderParams& params,
                                  const EncodedPair& pair, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  EncoderParams grad = ZeroLike(params);
  PairLossAndGradient(params, pair, &grad);
  std::vector<double> analytic;
  analytic.reserve(params.ParameterCount());
  grad.ForEach([&analytic](double v) { analytic.push_back(v); });

  GradientCheckReport report;
  EncoderParams probe = params;
  std::size_t k = 0;
  probe.ForEach([&](double& v) {
    const double saved = v;
    v = saved + eps;
    const double up = PairLossAndGradient(probe, pair, nullptr);
    v = saved - eps;
    const double down = PairLossAndGradient(probe, pair, nullptr);
    v = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic[k++];
    if (std::abs(a) + std::abs(numeric) < 1e-12) {
      ++report.skipped;
      return;
    }
    // The floor keeps round-off in the differences (about 1e-16 * loss / eps)
    // from dominating near-zero gradients.
    const double rel = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), kGradFloor});
    report.max_relative_error = std::max(report.max_relative_error, rel);
    ++report.checked;
  });
  return report;
}

namespace {

constexpr std::uint32_t kParamsVersion = 1;

void PutU32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorCode::kMalformedRecord, "truncated params file");
  }
  return b[0] | (b[1] << 8) | (b[2] << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void WriteParams(const EncoderParams& params, std::ostream& out) {
  const auto& c = params.config;
  out.write("XENC", 4);
  PutU32(out, kParamsVersion);
  PutU32(out, static_cast<std::uint32_t>(c.layers));
  PutU32(out, static_cast<std::uint32_t>(c.input_dim));
  PutU32(out, static_cast<std::uint32_t>(c.block_dim));
  PutU32(out, static_cast<std::uint32_t>(c.cell));
  PutU32(out, static_cast<std::uint32_t>(c.lstm_update));
  PutU32(out, static_cast<std::uint32_t>(c.tower_arch[0]));
  PutU32(out, static_cast<std::uint32_t>(c.tower_arch[1]));
  params.ForEach([&out](double v) {
    PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  });
}

EncoderParams ReadParams(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "XENC", 4) != 0) {
    throw Error(ErrorCode::kMalformedRecord, "not an XENC params file");
  }
  if (GetU32(in) != kParamsVersion) {
    throw Error(ErrorCode::kMalformedRecord, "unsupported params version");
  }
  EncoderConfig c;
  c.layers = GetU32(in);
  c.input_dim = GetU32(in);
  c.block_dim = GetU32(in);
  const std::uint32_t cell = GetU32(in);
  const std::uint32_t update = GetU32(in);
  const std::uint32_t arch0 = GetU32(in);
  const std::uint32_t arch1 = GetU32(in);
  if (cell > 2 || update > 1 || arch0 > 1 || arch1 > 1) {
    throw Error(ErrorCode::kMalformedRecord, "bad params header");
  }
  c.cell = static_cast<CellType>(cell);
  c.lstm_update = static_cast<LstmUpdate>(update);
  c.tower_arch = {static_cast<Arch>(arch0), static_cast<Arch>(arch1)};
  try {
    ValidateConfig(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
  EncoderParams params;
  params.config = c;
  params.towers = {ZeroTower(c), ZeroTower(c)};
  params.ForEach([&in](double& v) {
    v = static_cast<double>(std::bit_cast<float>(GetU32(in)));
  });
  return params;
}

void SaveParams(const EncoderParams& params,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteParams(params, out);
}

EncoderParams LoadParams(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadParams(in);
}

nlohmann::json ConfigToJson(const EncoderConfig& config) {
  return {{"layers", config.layers},
          {"input_dim", config.input_dim},
          {"block_dim", config.block_dim},
          {"cell", CellName(config.cell)},
          {"lstm_update",
           config.lstm_update == LstmUpdate::kStandard ? "standard" : "printed"},
          {"lr", config.lr},
          {"epochs", config.epochs},
          {"patience", config.patience},
          {"seed", config.seed},
          {"tower_arch",
           {ArchName(config.tower_arch[0]), ArchName(config.tower_arch[1])}}};
}

}  // namespace xasm
