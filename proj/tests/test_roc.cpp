// Copyright 2026 The mdetect Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "mdetect/errors.hpp"
#include "mdetect/learner.hpp"
#include "oracles.hpp"

namespace mdetect {
namespace {

std::vector<ScoredLabel> random_scores(std::mt19937_64& rng) {
  const std::size_t n = 2 + rng() % 60;
  const int levels = 1 + static_cast<int>(rng() % 25);  // few levels force ties
  std::vector<ScoredLabel> out(n);
  for (auto& s : out) {
    s.malicious = rng() % 2;
    s.score = static_cast<double>(static_cast<int>(rng() % levels)) / 4.0 + (s.malicious ? 0.5 : 0.0);
  }
  out[0].malicious = true;
  out[1].malicious = false;
  return out;
}

TEST(Roc, PerfectSeparation) {
  std::vector<ScoredLabel> s{{0.9, true}, {0.1, false}};
  auto c = roc(s);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0], (RocPoint{0.9, 0.0, 1.0}));
  EXPECT_EQ(c.points[1], (RocPoint{0.1, 1.0, 1.0}));
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 0.005), 1.0);
}

TEST(Roc, Inverted) {
  std::vector<ScoredLabel> s{{0.1, true}, {0.9, false}};
  auto c = roc(s);
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 0.999), 0.0);
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 1.0), 1.0);
}

TEST(Roc, TiesFormOnePoint) {
  std::vector<ScoredLabel> s{{0.5, true}, {0.5, false}};
  auto c = roc(s);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0], (RocPoint{0.5, 1.0, 1.0}));
}

TEST(Roc, OneClassOrNanThrows) {
  std::vector<ScoredLabel> pos{{0.5, true}, {0.2, true}};
  EXPECT_THROW(roc(pos), DataError);
  std::vector<ScoredLabel> nan{{std::nan(""), true}, {0.2, false}};
  EXPECT_THROW(roc(nan), DataError);
}

TEST(DetectionAtFpr, StepRuleWithoutInterpolation) {
  RocCurve c;
  c.points = {{3.0, 0.001, 0.60}, {2.0, 0.01, 0.80}, {1.0, 1.0, 1.0}};
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 0.005), 0.60);
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 0.01), 0.80);
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 0.0005), 0.0);
  EXPECT_DOUBLE_EQ(detection_at_fpr(c, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(operating_threshold(c, 0.005), 3.0);
  EXPECT_DOUBLE_EQ(operating_threshold(c, 0.5), 2.0);
  EXPECT_EQ(operating_threshold(c, 0.0005), std::numeric_limits<double>::infinity());
}

TEST(Roc, InvariantsOnRandomScoreSets) {
  std::mt19937_64 rng(41);
  const std::vector<double> targets{0.0, 0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.99, 1.0};
  for (int t = 0; t < 1000; ++t) {
    auto s = random_scores(rng);
    auto c = roc(s);
    std::set<double> distinct;
    for (const auto& x : s) distinct.insert(x.score);
    ASSERT_EQ(c.points.size(), distinct.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& p = c.points[i];
      ASSERT_GE(p.fpr, 0.0);
      ASSERT_LE(p.fpr, 1.0);
      ASSERT_GE(p.tpr, 0.0);
      ASSERT_LE(p.tpr, 1.0);
      if (i) {
        ASSERT_LT(p.threshold, c.points[i - 1].threshold);
        ASSERT_GE(p.fpr, c.points[i - 1].fpr);
        ASSERT_GE(p.tpr, c.points[i - 1].tpr);
      }
    }
    ASSERT_DOUBLE_EQ(c.points.back().fpr, 1.0);
    ASSERT_DOUBLE_EQ(c.points.back().tpr, 1.0);
    double prev = 0;
    for (double target : targets) {
      const double d = detection_at_fpr(c, target);
      ASSERT_DOUBLE_EQ(d, oracle::detection_at_fpr(s, target)) << "target " << target;
      ASSERT_GE(d, prev);
      prev = d;
      // The operating threshold realizes the reported detection.
      const double th = operating_threshold(c, target);
      double tp = 0, fp = 0, pos = 0, neg = 0;
      for (const auto& x : s) {
        (x.malicious ? pos : neg) += 1;
        if (x.score >= th) (x.malicious ? tp : fp) += 1;
      }
      ASSERT_LE(fp / neg, target);
      ASSERT_DOUBLE_EQ(tp / pos, d);
    }
    ASSERT_DOUBLE_EQ(detection_at_fpr(c, 1.0), 1.0);
  }
}

TEST(Roc, CsvHasHeaderAndOneRowPerPoint) {
  std::vector<ScoredLabel> s{{0.9, true}, {0.5, false}, {0.5, true}, {0.1, false}};
  std::ostringstream out;
  write_roc_csv(roc(s), out);
  EXPECT_EQ(out.str(), "threshold,fpr,tpr\n0.9,0,0.5\n0.5,0.5,1\n0.1,1,1\n");
}

}  // namespace
}  // namespace mdetect
