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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xasm/error.hpp"
#include "xasm/rng.hpp"

namespace xasm {
namespace {

// Six items with one tie across the labels.
const std::vector<ScoredItem> kSix = {{0.9, 1}, {0.8, 0}, {0.7, 1},
                                      {0.7, 0}, {0.4, 1}, {0.2, 0}};

TEST(RocAucTest, OracleValueForSixItems) {
  // Frozen from oracle::PairCountAuc: (5 + 0.5) / 9.
  EXPECT_DOUBLE_EQ(oracle::PairCountAuc(kSix), 5.5 / 9.0);
  EXPECT_DOUBLE_EQ(RocAuc(kSix).auc, 5.5 / 9.0);
}

TEST(RocAucTest, PerfectAndConstant) {
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<ScoredItem>{{0.9, 1}, {0.8, 1}, {0.1, 0}}).auc, 1.0);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<ScoredItem>{{0.5, 1}, {0.5, 0}, {0.5, 0}}).auc, 0.5);
}

TEST(RocAucTest, DegenerateLabels) {
  try {
    RocAuc(std::vector<ScoredItem>{{0.5, 1}, {0.4, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateLabels);
  }
}

TEST(RocAucTest, CurveOnePointPerThreshold) {
  const auto roc = RocAuc(kSix);
  // (0,0) plus the five distinct scores.
  ASSERT_EQ(roc.curve.size(), 6u);
  EXPECT_TRUE(std::isinf(roc.curve.front().threshold));
  EXPECT_DOUBLE_EQ(roc.curve.back().fpr, 1.0);
  EXPECT_DOUBLE_EQ(roc.curve.back().tpr, 1.0);
  for (std::size_t i = 1; i < roc.curve.size(); ++i) {
    EXPECT_GE(roc.curve[i].fpr, roc.curve[i - 1].fpr);
    EXPECT_GE(roc.curve[i].tpr, roc.curve[i - 1].tpr);
  }
  // The tied 0.7 threshold moves both rates at once.
  EXPECT_DOUBLE_EQ(roc.curve[3].threshold, 0.7);
  EXPECT_DOUBLE_EQ(roc.curve[3].fpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(roc.curve[3].tpr, 2.0 / 3.0);
}

TEST(RocAucTest, MonotoneTransformAndLabelFlip) {
  Rng rng(5);
  std::vector<ScoredItem> items;
  for (int i = 0; i < 50; ++i) {
    items.push_back({std::round(rng.Uniform() * 20) / 20, static_cast<int>(rng.Below(2))});
  }
  items.push_back({0.3, 0});
  items.push_back({0.6, 1});
  auto squashed = items;
  auto flipped = items;
  for (auto& it : squashed) it.score = std::exp(3 * it.score);
  for (auto& it : flipped) it.label = 1 - it.label;
  const double auc = RocAuc(items).auc;
  EXPECT_NEAR(RocAuc(squashed).auc, auc, 1e-15);
  EXPECT_NEAR(RocAuc(flipped).auc, 1.0 - auc, 1e-15);
}

TEST(RocCsvTest, HeaderAndRows) {
  std::ostringstream out;
  WriteRocCsv(RocAuc(std::vector<ScoredItem>{{0.75, 1}, {0.25, 0}}), out);
  EXPECT_EQ(out.str(), "fpr,tpr,threshold\n0,0,inf\n0,1,0.75\n1,1,0.25\n");
}

std::vector<SizedItem> SizedFixture() {
  return {
      {{0.9, 1}, 2, 3},   {{0.1, 0}, 4, 1},   {{0.6, 0}, 3, 3},
      {{0.8, 1}, 25, 30}, {{0.3, 0}, 22, 40}, {{0.85, 0}, 21, 26},
      {{0.7, 1}, 10, 12}, {{0.2, 0}, 8, 9},   {{0.5, 1}, 3, 30},
  };
}

TEST(SizePartitionTest, BucketsMatchPerBucketOracle) {
  const auto buckets = SizePartitionEval(SizedFixture());
  ASSERT_EQ(buckets.size(), 3u);
  EXPECT_EQ(buckets[0].name, "small");
  EXPECT_EQ(buckets[0].count, 3u);
  EXPECT_EQ(buckets[1].name, "middle");
  EXPECT_EQ(buckets[1].count, 2u);  // the (3, 30) pair straddles and is left out
  EXPECT_EQ(buckets[2].name, "large");
  EXPECT_EQ(buckets[2].count, 3u);
  // Frozen from oracle::PairCountAuc on each bucket's members.
  EXPECT_DOUBLE_EQ(oracle::PairCountAuc({{0.9, 1}, {0.1, 0}, {0.6, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(oracle::PairCountAuc({{0.8, 1}, {0.3, 0}, {0.85, 0}}), 0.5);
  EXPECT_DOUBLE_EQ(*buckets[0].auc, 1.0);
  EXPECT_DOUBLE_EQ(*buckets[1].auc, 1.0);
  EXPECT_DOUBLE_EQ(*buckets[2].auc, 0.5);
}

TEST(SizePartitionTest, EmptyAndDegenerateBucketsWarn) {
  const std::vector<SizedItem> small_only = {{{0.9, 1}, 1, 2}, {{0.2, 0}, 3, 4}};
  const auto buckets = SizePartitionEval(small_only);
  ASSERT_EQ(buckets.size(), 3u);
  EXPECT_TRUE(buckets[0].auc.has_value());
  EXPECT_TRUE(buckets[0].warning.empty());
  EXPECT_FALSE(buckets[1].auc.has_value());
  EXPECT_FALSE(buckets[2].auc.has_value());
  EXPECT_FALSE(buckets[2].warning.empty());

  const std::vector<SizedItem> one_label = {{{0.9, 1}, 1, 2}, {{0.2, 1}, 3, 4}};
  EXPECT_FALSE(SizePartitionEval(one_label)[0].auc.has_value());
}

}  // namespace
}  // namespace xasm
