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

#include "xasm/lsh_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "xasm/error.hpp"
#include "xasm/rng.hpp"

namespace xasm {

LshIndex::LshIndex(std::vector<StoredBlock> items, std::size_t tables,
                   std::size_t bits, std::uint64_t seed)
    : tables_(tables), bits_(bits), seed_(seed), items_(std::move(items)) {
  if (tables_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one table");
  }
  if (bits_ > 64) {
    throw Error(ErrorCode::kInvalidArgument, "at most 64 bits per table");
  }
  if (!items_.empty()) dim_ = static_cast<std::size_t>(items_.front().embedding.size());
  for (const auto& item : items_) {
    if (static_cast<std::size_t>(item.embedding.size()) != dim_) {
      throw Error(ErrorCode::kDimMismatch, "stored embeddings differ in length");
    }
  }
  Rng rng(seed_);
  planes_.resize(tables_);
  for (auto& planes : planes_) {
    planes.resize(static_cast<Eigen::Index>(bits_), static_cast<Eigen::Index>(dim_));
    for (Eigen::Index r = 0; r < planes.rows(); ++r)
      for (Eigen::Index c = 0; c < planes.cols(); ++c) planes(r, c) = rng.Gaussian();
  }
  buckets_.resize(tables_);
  for (std::size_t t = 0; t < tables_; ++t) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      buckets_[t][Signature(t, items_[i].embedding)].push_back(i);
    }
  }
}

std::uint64_t LshIndex::Signature(std::size_t table,
                                  const Eigen::VectorXd& v) const {
  const Eigen::VectorXd proj = planes_[table] * v;
  std::uint64_t sig = 0;
  for (Eigen::Index b = 0; b < proj.size(); ++b) {
    if (proj(b) >= 0.0) sig |= std::uint64_t{1} << b;
  }
  return sig;
}

const std::vector<std::size_t>& LshIndex::Bucket(
    std::size_t table, const Eigen::VectorXd& v) const {
  static const std::vector<std::size_t> kEmpty;
  const auto it = buckets_[table].find(Signature(table, v));
  return it == buckets_[table].end() ? kEmpty : it->second;
}

std::vector<Match> LshIndex::Query(const Eigen::VectorXd& q, double threshold,
                                   QueryMode mode) const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in [0, 1]");
  }
  if (items_.empty()) return {};
  if (static_cast<std::size_t>(q.size()) != dim_) {
    throw Error(ErrorCode::kDimMismatch, "query length differs from index");
  }
  std::vector<std::size_t> candidates;
  if (mode == QueryMode::kExact) {
    candidates.resize(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) candidates[i] = i;
  } else {
    for (std::size_t t = 0; t < tables_; ++t) {
      const auto& bucket = Bucket(t, q);
      candidates.insert(candidates.end(), bucket.begin(), bucket.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
  }
  std::vector<Match> out;
  for (std::size_t i : candidates) {
    const double sim = std::exp(-(items_[i].embedding - q).lpNorm<1>());
    if (sim >= threshold) out.push_back({items_[i].ref, sim});
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.ref < b.ref;
  });
  return out;
}

namespace {

constexpr std::uint32_t kIndexVersion = 1;

template <typename T>
void Put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T Get(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) {
    throw Error(ErrorCode::kMalformedRecord, "truncated index file");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void WriteIndex(const LshIndex& index, std::ostream& out) {
  out.write("XLSH", 4);
  Put<std::uint32_t>(out, kIndexVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(index.tables()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(index.bits()));
  Put<std::uint64_t>(out, index.seed());
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(index.dim()));
  Put<std::uint64_t>(out, index.size());
  for (const auto& item : index.items()) {
    Put<std::uint64_t>(out, item.ref);
    for (Eigen::Index k = 0; k < item.embedding.size(); ++k) {
      Put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(item.embedding(k)));
    }
  }
}

LshIndex ReadIndex(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "XLSH", 4) != 0) {
    throw Error(ErrorCode::kMalformedRecord, "not an XLSH index");
  }
  if (Get<std::uint32_t>(in) != kIndexVersion) {
    throw Error(ErrorCode::kMalformedRecord, "unsupported index version");
  }
  const auto tables = Get<std::uint32_t>(in);
  const auto bits = Get<std::uint32_t>(in);
  const auto seed = Get<std::uint64_t>(in);
  const auto dim = Get<std::uint32_t>(in);
  const auto count = Get<std::uint64_t>(in);
  std::vector<StoredBlock> items;
  for (std::uint64_t i = 0; i < count; ++i) {
    StoredBlock item;
    item.ref = Get<std::uint64_t>(in);
    item.embedding.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      item.embedding(k) = std::bit_cast<double>(Get<std::uint64_t>(in));
    }
    items.push_back(std::move(item));
  }
  return LshIndex(std::move(items), tables, bits, seed);
}

void SaveIndex(const LshIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteIndex(index, out);
}

LshIndex LoadIndex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadIndex(in);
}

}  // namespace xasm
