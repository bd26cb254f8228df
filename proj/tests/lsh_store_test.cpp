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
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "xasm/error.hpp"
#include "xasm/rng.hpp"

namespace xasm {
namespace {

Eigen::VectorXd RandomVector(Rng& rng, std::size_t dim, double scale) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = scale * rng.Gaussian();
  return v;
}

std::vector<StoredBlock> RandomStore(Rng& rng, std::size_t n, std::size_t dim,
                                     double scale) {
  std::vector<StoredBlock> items;
  for (std::size_t i = 0; i < n; ++i) items.push_back({100 + i, RandomVector(rng, dim, scale)});
  return items;
}

// Full scan, filtered and sorted independently of the index.
std::vector<Match> ScanOracle(const std::vector<StoredBlock>& items,
                              const Eigen::VectorXd& q, double threshold) {
  std::vector<Match> out;
  for (const auto& it : items) {
    double l1 = 0.0;
    for (Eigen::Index k = 0; k < q.size(); ++k) l1 += std::abs(it.embedding(k) - q(k));
    if (std::exp(-l1) >= threshold) out.push_back({it.ref, std::exp(-l1)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    return a.similarity > b.similarity;
  });
  return out;
}

TEST(LshIndexTest, EmptyIndexAnswersNothing) {
  const LshIndex index({}, 8, 12, 1);
  EXPECT_EQ(index.size(), 0u);
  EXPECT_TRUE(index.Query(Eigen::VectorXd::Zero(4), 0.0, QueryMode::kExact).empty());
  EXPECT_TRUE(index.Query(Eigen::VectorXd::Zero(4), 0.0, QueryMode::kApprox).empty());
}

TEST(LshIndexTest, DuplicatesShareEverySignature) {
  Rng rng(3);
  const Eigen::VectorXd v = RandomVector(rng, 16, 1.0);
  const LshIndex index({{1, v}, {2, v}}, 8, 12, 9);
  for (std::size_t t = 0; t < index.tables(); ++t) {
    EXPECT_EQ(index.Bucket(t, v), (std::vector<std::size_t>{0, 1}));
  }
}

TEST(LshIndexTest, ZeroBitsIsOneBucket) {
  Rng rng(4);
  const auto items = RandomStore(rng, 30, 8, 1.0);
  const LshIndex index(items, 1, 0, 2);
  EXPECT_EQ(index.Bucket(0, items[0].embedding).size(), 30u);
  const Eigen::VectorXd q = RandomVector(rng, 8, 1.0);
  EXPECT_EQ(index.Query(q, 0.0, QueryMode::kApprox),
            index.Query(q, 0.0, QueryMode::kExact));
}

TEST(LshIndexTest, StoredEmbeddingComesFirst) {
  Rng rng(5);
  const auto items = RandomStore(rng, 50, 10, 0.3);
  const LshIndex index(items, 8, 12, 1);
  for (QueryMode mode : {QueryMode::kExact, QueryMode::kApprox}) {
    const auto hits = index.Query(items[17].embedding, 0.99, mode);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].ref, 117u);
    EXPECT_DOUBLE_EQ(hits[0].similarity, 1.0);
  }
}

TEST(LshIndexTest, ThresholdOneNeedsExactDuplicate) {
  Rng rng(6);
  const LshIndex index(RandomStore(rng, 20, 6, 1.0), 4, 8, 1);
  EXPECT_TRUE(index.Query(RandomVector(rng, 6, 1.0), 1.0, QueryMode::kExact).empty());
}

TEST(LshIndexTest, ExactMatchesScanAndApproxIsSubset) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto items = RandomStore(rng, 60, 8, 0.1);
    const LshIndex index(items, 8, 12, static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd q = RandomVector(rng, 8, 0.1);
    const auto exact = index.Query(q, 0.3, QueryMode::kExact);
    const auto scan = ScanOracle(items, q, 0.3);
    ASSERT_EQ(exact.size(), scan.size());
    for (std::size_t i = 0; i < exact.size(); ++i) {
      EXPECT_EQ(exact[i].ref, scan[i].ref);
      EXPECT_NEAR(exact[i].similarity, scan[i].similarity, 1e-14);
    }
    for (const auto& m : index.Query(q, 0.3, QueryMode::kApprox)) {
      EXPECT_NE(std::find(exact.begin(), exact.end(), m), exact.end());
    }
  }
}

TEST(LshIndexTest, NearDuplicatesCollideMoreOften) {
  Rng rng(8);
  int near = 0;
  int random = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd a = RandomVector(rng, 16, 1.0);
    const Eigen::VectorXd b = a + RandomVector(rng, 16, 0.05);
    const Eigen::VectorXd c = RandomVector(rng, 16, 1.0);
    const LshIndex index({{0, a}}, 1, 12, static_cast<std::uint64_t>(trial));
    near += index.Signature(0, a) == index.Signature(0, b);
    random += index.Signature(0, a) == index.Signature(0, c);
  }
  EXPECT_GT(near, random);
  EXPECT_GT(near, 500);
}

TEST(LshIndexTest, Errors) {
  Rng rng(9);
  EXPECT_THROW(LshIndex({{0, RandomVector(rng, 3, 1)}, {1, RandomVector(rng, 4, 1)}}, 2, 2, 1),
               Error);
  const LshIndex index(RandomStore(rng, 5, 3, 1.0), 2, 4, 1);
  try {
    index.Query(RandomVector(rng, 4, 1), 0.5, QueryMode::kExact);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
  EXPECT_THROW(index.Query(RandomVector(rng, 3, 1), 1.5, QueryMode::kExact), Error);
}

TEST(LshIndexTest, FileRoundTripRebuildsBuckets) {
  Rng rng(10);
  const auto items = RandomStore(rng, 40, 6, 0.5);
  const LshIndex index(items, 3, 5, 77);
  std::stringstream buf;
  WriteIndex(index, buf);
  const LshIndex back = ReadIndex(buf);
  EXPECT_EQ(back.tables(), 3u);
  EXPECT_EQ(back.bits(), 5u);
  EXPECT_EQ(back.seed(), 77u);
  const Eigen::VectorXd q = RandomVector(rng, 6, 0.5);
  EXPECT_EQ(back.Query(q, 0.0, QueryMode::kApprox), index.Query(q, 0.0, QueryMode::kApprox));
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(back.Signature(t, q), index.Signature(t, q));
  }
}

}  // namespace
}  // namespace xasm
