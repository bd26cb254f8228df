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

#ifndef XASM_LSH_STORE_HPP_
#define XASM_LSH_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace xasm {

using BlockRef = std::uint64_t;

struct StoredBlock {
  BlockRef ref = 0;
  Eigen::VectorXd embedding;
};

struct Match {
  BlockRef ref = 0;
  double similarity = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

enum class QueryMode { kApprox, kExact };

// Random-hyperplane LSH over block embeddings. Candidates are re-scored with
// exp(-L1) so ranking matches the encoder's similarity. Immutable once
// built.
class LshIndex {
 public:
  static constexpr std::size_t kDefaultTables = 8;
  static constexpr std::size_t kDefaultBits = 12;

  LshIndex() = default;
  // Throws kDimMismatch for non-uniform dims, kInvalidArgument when
  // tables == 0 or bits > 64.
  LshIndex(std::vector<StoredBlock> items, std::size_t tables,
           std::size_t bits, std::uint64_t seed);

  std::size_t tables() const { return tables_; }
  std::size_t bits() const { return bits_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return items_.size(); }
  const std::vector<StoredBlock>& items() const { return items_; }

  std::uint64_t Signature(std::size_t table, const Eigen::VectorXd& v) const;
  // Item positions sharing v's bucket in the given table.
  const std::vector<std::size_t>& Bucket(std::size_t table,
                                         const Eigen::VectorXd& v) const;

  // Matches with similarity >= threshold, descending, ties by ref. Throws
  // kDimMismatch, kInvalidArgument (threshold outside [0, 1]).
  std::vector<Match> Query(const Eigen::VectorXd& q, double threshold,
                           QueryMode mode) const;

 private:
  std::size_t tables_ = 0;
  std::size_t bits_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t dim_ = 0;
  std::vector<StoredBlock> items_;
  std::vector<Eigen::MatrixXd> planes_;  // per table: bits x dim
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>>
      buckets_;
};

// Little-endian: "XLSH", u32 version, u32 tables, u32 bits, u64 seed,
// u32 dim, u64 count, then count x (u64 ref, dim x f64). Hyperplanes are
// regenerated from the seed on load.
void WriteIndex(const LshIndex& index, std::ostream& out);
LshIndex ReadIndex(std::istream& in);
void SaveIndex(const LshIndex& index, const std::filesystem::path& path);
LshIndex LoadIndex(const std::filesystem::path& path);

}  // namespace xasm

#endif  // XASM_LSH_STORE_HPP_
