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

#include "xasm/instr_embed.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include "xasm/error.hpp"
#include "xasm/rng.hpp"

namespace xasm {

EmbeddingMatrix::EmbeddingMatrix(Arch arch, std::size_t dim, Vocabulary vocab)
    : arch_(arch),
      dim_(dim),
      vocab_(std::move(vocab)),
      values_(dim_ * vocab_.Size(), 0.0f) {}

double KeepProbability(std::uint64_t count, std::uint64_t total,
                       double sample) {
  if (sample <= 0.0 || count == 0 || total == 0) return 1.0;
  const double threshold = sample * static_cast<double>(total);
  const double c = static_cast<double>(count);
  return std::min(1.0, (std::sqrt(c / threshold) + 1.0) * threshold / c);
}

namespace {

// Plain or relaxed-atomic access to the shared tables. Parallel workers use
// the atomic form, so concurrent updates may be lost but never tear.
template <bool kShared>
struct Access {
  static float Load(const float& x) {
    if constexpr (kShared) {
      return std::atomic_ref<float>(const_cast<float&>(x))
          .load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void Store(float& x, float v) {
    if constexpr (kShared) {
      std::atomic_ref<float>(x).store(v, std::memory_order_relaxed);
    } else {
      x = v;
    }
  }
};

class NegativeSampler {
 public:
  explicit NegativeSampler(const Vocabulary& vocab) {
    cumulative_.reserve(vocab.Size());
    double total = 0.0;
    for (std::size_t i = 0; i < vocab.Size(); ++i) {
      total += std::pow(static_cast<double>(vocab.Count(i)), 0.75);
      cumulative_.push_back(total);
    }
  }

  std::uint32_t Draw(Rng& rng) const {
    const double x = rng.Uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return static_cast<std::uint32_t>(
        std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                 static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
  }

 private:
  std::vector<double> cumulative_;
};

struct Shared {
  const SgnsConfig& config;
  const Vocabulary& vocab;
  const NegativeSampler& sampler;
  const std::vector<std::vector<std::uint32_t>>& blocks;
  float* input;   // center vectors, the returned matrix
  float* output;  // context vectors
  std::uint64_t words_per_epoch;
  std::uint64_t total_words;
};

struct WorkerStats {
  double loss = 0.0;
  std::uint64_t pairs = 0;
};

double LogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <bool kShared>
WorkerStats RunEpochSlice(const Shared& s, std::size_t epoch,
                          std::size_t first_block, std::size_t last_block,
                          std::uint64_t words_before, Rng& rng) {
  using A = Access<kShared>;
  const std::size_t dim = s.config.dim;
  const auto window = static_cast<std::ptrdiff_t>(s.config.window);
  std::vector<double> hidden_grad(dim);
  std::vector<std::uint32_t> kept;
  WorkerStats stats;
  std::uint64_t seen = words_before;
  const std::uint64_t total = s.vocab.TotalCount();

  for (std::size_t b = first_block; b < last_block; ++b) {
    const auto& block = s.blocks[b];
    const double progress =
        static_cast<double>(epoch * s.words_per_epoch + seen) /
        static_cast<double>(s.total_words + 1);
    const double alpha =
        std::max(s.config.lr * (1.0 - progress), s.config.lr * 1e-4);
    seen += block.size();

    kept.clear();
    for (std::uint32_t w : block) {
      const double keep = KeepProbability(s.vocab.Count(w), total,
                                          s.config.subsample);
      if (keep >= 1.0 || rng.Uniform() < keep) kept.push_back(w);
    }

    const auto n = static_cast<std::ptrdiff_t>(kept.size());
    for (std::ptrdiff_t pos = 0; pos < n; ++pos) {
      float* center = s.input + static_cast<std::size_t>(kept[pos]) * dim;
      for (std::ptrdiff_t ctx = std::max<std::ptrdiff_t>(0, pos - window);
           ctx <= std::min(n - 1, pos + window); ++ctx) {
        if (ctx == pos) continue;
        std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
        for (std::size_t d = 0; d <= s.config.negatives; ++d) {
          std::uint32_t target;
          double label;
          if (d == 0) {
            target = kept[ctx];
            label = 1.0;
          } else {
            target = s.sampler.Draw(rng);
            if (target == kept[ctx]) continue;
            label = 0.0;
          }
          float* out = s.output + static_cast<std::size_t>(target) * dim;
          double dot = 0.0;
          for (std::size_t i = 0; i < dim; ++i) {
            dot += static_cast<double>(A::Load(center[i])) * A::Load(out[i]);
          }
          stats.loss -= label > 0.0 ? LogSigmoid(dot) : LogSigmoid(-dot);
          const double sig = 1.0 / (1.0 + std::exp(-dot));
          const double g = (label - sig) * alpha;
          for (std::size_t i = 0; i < dim; ++i) {
            const float o = A::Load(out[i]);
            hidden_grad[i] += g * o;
            A::Store(out[i], static_cast<float>(o + g * A::Load(center[i])));
          }
        }
        for (std::size_t i = 0; i < dim; ++i) {
          A::Store(center[i],
                   static_cast<float>(A::Load(center[i]) + hidden_grad[i]));
        }
        ++stats.pairs;
      }
    }
  }
  return stats;
}

}  // namespace

SgnsResult TrainSgns(const Corpus& corpus, const SgnsConfig& config) {
  if (config.dim == 0 || config.window == 0 || config.negatives == 0 ||
      config.epochs == 0 || config.lr <= 0.0 || config.subsample < 0.0 ||
      config.jobs == 0) {
    throw Error(ErrorCode::kBadConfig, "SGNS parameters must be positive");
  }
  if (corpus.Empty()) throw Error(ErrorCode::kEmptyCorpus, "no instructions");
  const Arch arch = corpus.functions.front().arch;
  for (const auto& fn : corpus.functions) {
    bool same = fn.arch == arch;
    for (const auto& block : fn.blocks) same = same && block.arch == arch;
    if (!same) {
      throw Error(ErrorCode::kArchMismatch,
                  "instruction embeddings are trained per architecture");
    }
  }

  const Vocabulary full = BuildVocabulary(corpus);
  Vocabulary vocab;
  for (std::size_t i = 0; i < full.Size(); ++i) {
    if (full.Count(i) >= config.min_count) vocab.Add(full.Token(i), full.Count(i));
  }
  if (vocab.Size() == 0) {
    throw Error(ErrorCode::kZeroVocabulary, "no token reaches min_count");
  }

  std::vector<std::vector<std::uint32_t>> blocks;
  std::uint64_t words = 0;
  for (const auto* block : corpus.Blocks()) {
    std::vector<std::uint32_t> ids;
    for (const auto& instr : block->instrs) {
      const auto idx = vocab.IndexOf(instr);
      if (idx >= 0) ids.push_back(static_cast<std::uint32_t>(idx));
    }
    words += ids.size();
    if (!ids.empty()) blocks.push_back(std::move(ids));
  }

  SgnsResult result;
  result.matrix = EmbeddingMatrix(arch, config.dim, vocab);
  Rng init(config.seed);
  const double half = 0.5 / static_cast<double>(config.dim);
  for (float& v : result.matrix.values()) {
    v = static_cast<float>(init.Uniform(-half, half));
  }
  std::vector<float> context(result.matrix.values().size(), 0.0f);

  const NegativeSampler sampler(vocab);
  const Shared shared{config,
                      result.matrix.vocab(),
                      sampler,
                      blocks,
                      result.matrix.values().data(),
                      context.data(),
                      words,
                      words * config.epochs};

  const std::size_t jobs = std::min<std::size_t>(config.jobs, std::max<std::size_t>(1, blocks.size()));
  std::vector<Rng> rngs;
  for (std::size_t t = 0; t < jobs; ++t) {
    rngs.emplace_back(config.seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL * (t + 1));
  }

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    WorkerStats total;
    if (jobs == 1) {
      total = RunEpochSlice<false>(shared, epoch, 0, blocks.size(), 0, rngs[0]);
    } else {
      std::vector<WorkerStats> stats(jobs);
      std::vector<std::thread> workers;
      std::uint64_t words_before = 0;
      for (std::size_t t = 0; t < jobs; ++t) {
        const std::size_t first = blocks.size() * t / jobs;
        const std::size_t last = blocks.size() * (t + 1) / jobs;
        // words_before places the slice at its offset in the lr schedule.
        workers.emplace_back([&, t, first, last, words_before] {
          stats[t] = RunEpochSlice<true>(shared, epoch, first, last,
                                         words_before, rngs[t]);
        });
        for (std::size_t b = first; b < last; ++b) words_before += blocks[b].size();
      }
      for (auto& w : workers) w.join();
      for (const auto& s : stats) {
        total.loss += s.loss;
        total.pairs += s.pairs;
      }
    }
    result.pairs_trained += total.pairs;
    result.epoch_loss.push_back(
        total.pairs == 0 ? 0.0 : total.loss / static_cast<double>(total.pairs));
  }
  return result;
}

std::vector<float> Lookup(const EmbeddingMatrix& m, std::string_view token) {
  const auto idx = m.vocab().IndexOf(token);
  if (idx < 0) return std::vector<float>(m.dim(), 0.0f);
  const auto col = m.column(static_cast<std::size_t>(idx));
  return {col.begin(), col.end()};
}

std::vector<Neighbor> NearestTokens(const EmbeddingMatrix& m,
                                    std::string_view token, std::size_t k) {
  const auto idx = m.vocab().IndexOf(token);
  if (idx < 0) {
    throw Error(ErrorCode::kUnknownToken, "'" + std::string(token) + "'");
  }
  if (k >= m.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k must be smaller than the vocabulary size");
  }
  auto norm = [](std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
  };
  const auto query = m.column(static_cast<std::size_t>(idx));
  const double qn = norm(query);

  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < m.vocab_size(); ++i) {
    if (static_cast<std::int64_t>(i) == idx) continue;
    const auto col = m.column(i);
    double dot = 0.0;
    for (std::size_t d = 0; d < m.dim(); ++d) {
      dot += static_cast<double>(query[d]) * col[d];
    }
    const double denom = qn * norm(col);
    scored.emplace_back(denom > 0.0 ? dot / denom : 0.0, i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({m.vocab().Token(scored[i].second), scored[i].first});
  }
  return out;
}

namespace {

constexpr std::uint32_t kStoreVersion = 1;

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
    throw Error(ErrorCode::kMalformedRecord, "truncated embedding store");
  }
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void WriteEmbeddingStore(const EmbeddingMatrix& m, std::ostream& out) {
  out.write("XASM", 4);
  PutU32(out, kStoreVersion);
  PutU32(out, static_cast<std::uint32_t>(m.dim()));
  PutU32(out, static_cast<std::uint32_t>(m.vocab_size()));
  for (std::size_t i = 0; i < m.vocab_size(); ++i) {
    const std::string& token = m.vocab().Token(i);
    if (token.size() > 0xFFFF) {
      throw Error(ErrorCode::kInvalidArgument, "token longer than 65535 bytes");
    }
    const auto len = static_cast<std::uint16_t>(token.size());
    const unsigned char lb[2] = {static_cast<unsigned char>(len),
                                 static_cast<unsigned char>(len >> 8)};
    out.write(reinterpret_cast<const char*>(lb), 2);
    out.write(token.data(), static_cast<std::streamsize>(token.size()));
    for (float v : m.column(i)) PutU32(out, std::bit_cast<std::uint32_t>(v));
  }
}

EmbeddingMatrix ReadEmbeddingStore(std::istream& in, Arch arch) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "XASM", 4) != 0) {
    throw Error(ErrorCode::kMalformedRecord, "not an XASM embedding store");
  }
  if (GetU32(in) != kStoreVersion) {
    throw Error(ErrorCode::kMalformedRecord, "unsupported store version");
  }
  const std::uint32_t dim = GetU32(in);
  const std::uint32_t count = GetU32(in);
  Vocabulary vocab;
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(dim) * count);
  for (std::uint32_t i = 0; i < count; ++i) {
    unsigned char lb[2];
    if (!in.read(reinterpret_cast<char*>(lb), 2)) {
      throw Error(ErrorCode::kMalformedRecord, "truncated embedding store");
    }
    std::string token(lb[0] | (lb[1] << 8), '\0');
    if (!in.read(token.data(), static_cast<std::streamsize>(token.size()))) {
      throw Error(ErrorCode::kMalformedRecord, "truncated embedding store");
    }
    if (vocab.Contains(token)) {
      throw Error(ErrorCode::kMalformedRecord, "duplicate token " + token);
    }
    vocab.Add(token, 0);
    for (std::uint32_t d = 0; d < dim; ++d) {
      values.push_back(std::bit_cast<float>(GetU32(in)));
    }
  }
  EmbeddingMatrix m(arch, dim, std::move(vocab));
  m.values() = std::move(values);
  return m;
}

void SaveEmbeddingStore(const EmbeddingMatrix& m,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteEmbeddingStore(m, out);
}

EmbeddingMatrix LoadEmbeddingStore(const std::filesystem::path& path,
                                   Arch arch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadEmbeddingStore(in, arch);
}

void WriteEmbeddingTsv(const EmbeddingMatrix& m, std::ostream& out) {
  char buf[32];
  for (std::size_t i = 0; i < m.vocab_size(); ++i) {
    out << m.vocab().Token(i);
    for (float v : m.column(i)) {
      std::snprintf(buf, sizeof(buf), "\t%.9g", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace xasm
