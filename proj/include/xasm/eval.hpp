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

#ifndef XASM_EVAL_HPP_
#define XASM_EVAL_HPP_

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xasm {

struct ScoredItem {
  double score = 0.0;
  int label = 0;  // 1 positive, 0 negative
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  // Items scoring >= threshold are predicted positive; +inf for (0, 0).
  double threshold = std::numeric_limits<double>::infinity();
};

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> curve;  // one point per distinct threshold
};

// AUC from the Mann-Whitney rank statistic, ties counted half. Throws
// kDegenerateLabels unless both classes are present.
RocResult RocAuc(std::span<const ScoredItem> items);

// Header "fpr,tpr,threshold", one row per curve point.
void WriteRocCsv(const RocResult& roc, std::ostream& out);

struct SizedItem {
  ScoredItem item;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
};

struct BucketAuc {
  std::string name;  // "small" | "middle" | "large"
  std::size_t count = 0;
  std::optional<double> auc;  // empty when the bucket is degenerate
  std::string warning;
};

// Pairs with both blocks below small_max instructions are "small", both
// above large_min "large", both within [small_max, large_min] "middle";
// mixed pairs belong to no bucket. All three buckets are reported; empty or
// single-class buckets carry a warning instead of an AUC.
std::vector<BucketAuc> SizePartitionEval(std::span<const SizedItem> items,
                                         std::size_t small_max = 5,
                                         std::size_t large_min = 20);

}  // namespace xasm

#endif  // XASM_EVAL_HPP_
