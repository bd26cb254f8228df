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

#include "xasm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "xasm/error.hpp"

namespace xasm {

RocResult RocAuc(std::span<const ScoredItem> items) {
  std::size_t positives = 0;
  for (const auto& it : items) {
    if (it.label != 0 && it.label != 1) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(it.label);
  }
  const std::size_t negatives = items.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kDegenerateLabels,
                "need at least one positive and one negative");
  }

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].score < items[b].score;
  });

  // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled so
  // it stays an integer.
  std::size_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t tied_pos = 0;
    while (j < order.size() && items[order[j]].score == items[order[i]].score) {
      tied_pos += static_cast<std::size_t>(items[order[j]].label);
      ++j;
    }
    doubled_rank_sum += tied_pos * (i + 1 + j);
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  const double u =
      (static_cast<double>(doubled_rank_sum) - p * (p + 1.0)) / 2.0;

  RocResult out;
  out.auc = u / (p * n);

  out.curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = order.size(); k > 0;) {
    const double threshold = items[order[k - 1]].score;
    while (k > 0 && items[order[k - 1]].score == threshold) {
      (items[order[k - 1]].label == 1 ? tp : fp) += 1;
      --k;
    }
    out.curve.push_back({static_cast<double>(fp) / n,
                         static_cast<double>(tp) / p, threshold});
  }
  return out;
}

void WriteRocCsv(const RocResult& roc, std::ostream& out) {
  out << "fpr,tpr,threshold\n";
  char buf[96];
  for (const auto& pt : roc.curve) {
    if (std::isinf(pt.threshold)) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,inf\n", pt.fpr, pt.tpr);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pt.fpr, pt.tpr,
                    pt.threshold);
    }
    out << buf;
  }
}

std::vector<BucketAuc> SizePartitionEval(std::span<const SizedItem> items,
                                         std::size_t small_max,
                                         std::size_t large_min) {
  auto bucket_of = [&](std::size_t size) {
    if (size < small_max) return 0;
    if (size > large_min) return 2;
    return 1;
  };
  const char* names[3] = {"small", "middle", "large"};
  std::vector<ScoredItem> buckets[3];
  for (const auto& it : items) {
    const int a = bucket_of(it.size_a);
    if (a == bucket_of(it.size_b)) buckets[a].push_back(it.item);
  }
  std::vector<BucketAuc> out;
  for (int b = 0; b < 3; ++b) {
    BucketAuc result{names[b], buckets[b].size(), std::nullopt, ""};
    if (buckets[b].empty()) {
      result.warning = std::string(names[b]) + " bucket skipped: empty";
      out.push_back(std::move(result));
      continue;
    }
    try {
      result.auc = RocAuc(buckets[b]).auc;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateLabels) throw;
      result.warning = std::string(names[b]) + " bucket skipped: " + e.what();
    }
    out.push_back(std::move(result));
  }
  return out;
}

}  // namespace xasm
