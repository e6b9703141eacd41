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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mdetect/errors.hpp"
#include "mdetect/reviewerloop.hpp"

namespace mdetect {
namespace {

using testing::SixCandidates;

struct Outcome {
  int y;
  double weight;
  Provenance provenance;
};

std::vector<Outcome> outcomes(const HarmonizeResult& r) {
  std::vector<Outcome> out;
  for (const auto& ex : r.examples) out.push_back({ex.y, ex.weight, ex.provenance});
  return out;
}

void expect_outcome(const Outcome& o, int y, double weight, Provenance p, int index) {
  EXPECT_EQ(o.y, y) << "candidate " << index + 1;
  EXPECT_DOUBLE_EQ(o.weight, weight) << "candidate " << index + 1;
  EXPECT_EQ(o.provenance, p) << "candidate " << index + 1;
}

TEST(SimulateReview, PerfectAndDegenerateReviewers) {
  std::mt19937_64 rng(1);
  ReviewerProfile perfect;
  ReviewerProfile never{0.0, 0.0, 0};
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(simulate_review(GoldLabel::malicious, perfect, rng), GoldLabel::malicious);
    EXPECT_EQ(simulate_review(GoldLabel::benign, perfect, rng), GoldLabel::benign);
    EXPECT_EQ(simulate_review(GoldLabel::malicious, never, rng), GoldLabel::benign);
    EXPECT_EQ(simulate_review(GoldLabel::benign, never, rng), GoldLabel::benign);
  }
}

TEST(SimulateReview, FrequenciesMatchRates) {
  // 1e5 draws: sd of the frequency is about 0.0013, so +-0.01 is over 7 sd.
  ReviewerProfile noisy{0.8, 0.05, 17};
  SimulatedReviewer r(noisy);
  int tp = 0, fp = 0;
  for (int i = 0; i < 100000; ++i) tp += r.review(GoldLabel::malicious) == GoldLabel::malicious;
  for (int i = 0; i < 100000; ++i) fp += r.review(GoldLabel::benign) == GoldLabel::malicious;
  EXPECT_GE(tp / 1e5, 0.79);
  EXPECT_LE(tp / 1e5, 0.81);
  EXPECT_NEAR(fp / 1e5, 0.05, 0.005);
}

TEST(SimulateReview, SeededStreamIsReproducible) {
  SimulatedReviewer a({0.5, 0.5, 9}), b({0.5, 0.5, 9});
  for (int i = 0; i < 200; ++i) EXPECT_EQ(a.review(GoldLabel::benign), b.review(GoldLabel::benign));
}

TEST(QueryPolicy, BudgetRoundsDailyRate) {
  QueryPolicy p;
  EXPECT_EQ(p.budget_for(7), 560);
  p.budget_per_day = 1.5;
  EXPECT_EQ(p.budget_for(3), 5);
  p.budget_per_day = 0;
  EXPECT_EQ(p.budget_for(7), 0);
  p.budget_per_day = -1;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Harmonize, SixCandidatesMaliciousness) {
  SixCandidates f;
  f.policy.strategy = QueryStrategy::maliciousness;
  SimulatedReviewer reviewer({});
  ReviewLog log;
  auto r = harmonize_labels(f.candidates, &f.model, f.policy, 2, 10.0, reviewer, f.oracle(), log, 3);
  auto o = outcomes(r);
  expect_outcome(o[0], +1, 1, Provenance::vendor_consensus, 0);
  expect_outcome(o[1], +1, 1, Provenance::auto_relabel, 1);
  expect_outcome(o[2], +1, 1, Provenance::reviewer, 2);   // gold malicious
  expect_outcome(o[3], -1, 10, Provenance::reviewer, 3);  // gold benign
  expect_outcome(o[4], -1, 1, Provenance::default_benign, 4);
  expect_outcome(o[5], -1, 1, Provenance::default_benign, 5);
  EXPECT_EQ(r.query_count, 2);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log.find("c3")->label, GoldLabel::malicious);
  EXPECT_EQ(log.find("c3")->period, 3);
  EXPECT_DOUBLE_EQ(log.find("c3")->score, 1.2);
  EXPECT_EQ(log.find("c4")->label, GoldLabel::benign);
}

TEST(Harmonize, SixCandidatesUncertainty) {
  SixCandidates f;
  f.policy.strategy = QueryStrategy::uncertainty;
  SimulatedReviewer reviewer({});
  ReviewLog log;
  auto r = harmonize_labels(f.candidates, &f.model, f.policy, 2, 10.0, reviewer, f.oracle(), log, 0);
  auto o = outcomes(r);
  expect_outcome(o[0], +1, 1, Provenance::vendor_consensus, 0);
  expect_outcome(o[1], +1, 1, Provenance::auto_relabel, 1);
  expect_outcome(o[2], -1, 1, Provenance::default_benign, 2);
  expect_outcome(o[3], -1, 1, Provenance::default_benign, 3);
  expect_outcome(o[4], +1, 1, Provenance::reviewer, 4);
  expect_outcome(o[5], -1, 10, Provenance::reviewer, 5);
  EXPECT_TRUE(log.contains("c5"));
  EXPECT_TRUE(log.contains("c6"));
}

TEST(Harmonize, ZeroBudgetQueriesNothing) {
  SixCandidates f;
  SimulatedReviewer reviewer({});
  ReviewLog log;
  auto r = harmonize_labels(f.candidates, &f.model, f.policy, 0, 10.0, reviewer, f.oracle(), log, 0);
  auto o = outcomes(r);
  for (int i = 2; i < 6; ++i) expect_outcome(o[i], -1, 1, Provenance::default_benign, i);
  EXPECT_EQ(r.query_count, 0);
  EXPECT_EQ(log.size(), 0u);
}

TEST(Harmonize, AutoRelabelIsStrict) {
  SixCandidates f;
  f.model.w[2] = 1.25;
  SimulatedReviewer reviewer({});
  ReviewLog log;
  auto r = harmonize_labels(f.candidates, &f.model, f.policy, 0, 10.0, reviewer, f.oracle(), log, 0);
  EXPECT_EQ(r.examples[2].provenance, Provenance::default_benign);
}

TEST(Harmonize, PriorReviewsAreReusedNotRequeried) {
  SixCandidates f;
  SimulatedReviewer reviewer({});
  ReviewLog log;
  log.record("c3", {GoldLabel::benign, 0, 0.5});
  log.record("c2", {GoldLabel::benign, 0, 0.5});
  auto r = harmonize_labels(f.candidates, &f.model, f.policy, 2, 10.0, reviewer, f.oracle(), log, 1);
  // Prior review wins over auto-relabel and keeps weight W.
  expect_outcome(outcomes(r)[1], -1, 10, Provenance::reviewer, 1);
  expect_outcome(outcomes(r)[2], -1, 10, Provenance::reviewer, 2);
  // Budget moves on to the next-highest eligible scores.
  EXPECT_EQ(r.examples[3].provenance, Provenance::reviewer);
  EXPECT_EQ(r.examples[4].provenance, Provenance::reviewer);
  EXPECT_EQ(r.query_count, 2);
  EXPECT_EQ(log.size(), 4u);
}

TEST(Harmonize, WithoutModelSkipsAutoRelabelAndQueriesById) {
  SixCandidates f;
  for (auto& c : f.candidates) c.x_current = {};
  std::reverse(f.candidates.begin(), f.candidates.end());
  for (auto strategy : {QueryStrategy::maliciousness, QueryStrategy::uncertainty}) {
    f.policy.strategy = strategy;
    SimulatedReviewer reviewer({});
    ReviewLog log;
    auto r = harmonize_labels(f.candidates, nullptr, f.policy, 2, 10.0, reviewer, f.oracle(), log, 0);
    EXPECT_TRUE(log.contains("c2"));
    EXPECT_TRUE(log.contains("c3"));
    for (const auto& ex : r.examples) EXPECT_NE(ex.provenance, Provenance::auto_relabel);
  }
}

TEST(Harmonize, DuplicateIdsThrow) {
  SixCandidates f;
  f.candidates.push_back(f.candidates[2]);
  SimulatedReviewer reviewer({});
  ReviewLog log;
  EXPECT_THROW(
      harmonize_labels(f.candidates, &f.model, f.policy, 2, 10.0, reviewer, f.oracle(), log, 0),
      DataError);
}

TEST(Harmonize, RandomizedSelectionProperties) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng() % 40);
    Model model;
    std::vector<Candidate> cands;
    std::map<BinaryId, GoldLabel> gold;
    for (std::uint32_t i = 0; i < n; ++i) {
      // Quarter-step scores produce ties.
      model.w.push_back(std::round(u(rng) * 4) / 4);
      Candidate c;
      c.binary_id = "b" + std::to_string(rng() % 100000) + "_" + std::to_string(i);
      c.x_current = FeatureVector{n, {i}};
      c.detections = rng() % 4 == 0 ? 5 : static_cast<int>(rng() % 3);
      gold[c.binary_id] = rng() % 2 ? GoldLabel::malicious : GoldLabel::benign;
      cands.push_back(c);
    }
    for (auto& c : cands) c.x_current.dims = n;
    QueryPolicy policy;
    policy.strategy = t % 2 ? QueryStrategy::uncertainty : QueryStrategy::maliciousness;
    const std::int64_t budget = static_cast<std::int64_t>(rng() % 12);
    SimulatedReviewer reviewer({});
    ReviewLog log;
    GoldOracle oracle = [&](const BinaryId& id) { return gold.at(id); };
    auto r = harmonize_labels(cands, &model, policy, budget, 10.0, reviewer, oracle, log, 0);
    ASSERT_LE(r.query_count, budget);
    ASSERT_EQ(static_cast<std::size_t>(r.query_count), log.size());

    std::vector<double> chosen, rest;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto& ex = r.examples[i];
      const double s = model.w[i];
      if (ex.provenance == Provenance::reviewer) {
        ASSERT_EQ(ex.y > 0, gold[cands[i].binary_id] == GoldLabel::malicious);
        ASSERT_DOUBLE_EQ(ex.weight, ex.y > 0 ? 1.0 : 10.0);
        ASSERT_LE(s, policy.auto_relabel_threshold);
        chosen.push_back(s);
      } else if (ex.provenance == Provenance::default_benign) {
        rest.push_back(s);
      } else if (ex.provenance == Provenance::auto_relabel) {
        ASSERT_GT(s, policy.auto_relabel_threshold);
      }
      if (cands[i].detections >= 4) ASSERT_EQ(ex.provenance, Provenance::vendor_consensus);
    }
    if (!rest.empty()) ASSERT_EQ(static_cast<std::int64_t>(chosen.size()), budget);
    for (double c : chosen)
      for (double o : rest) {
        if (policy.strategy == QueryStrategy::maliciousness)
          ASSERT_GE(c, o);
        else
          ASSERT_LE(std::abs(c), std::abs(o));
      }
  }
}

TEST(Harmonize, UnlimitedBudgetRecoversGold) {
  SixCandidates f;
  SimulatedReviewer reviewer({});
  ReviewLog log;
  auto r = harmonize_labels(f.candidates, &f.model, f.policy, 100, 10.0, reviewer, f.oracle(), log, 0);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& ex = r.examples[i];
    if (ex.provenance == Provenance::reviewer)
      EXPECT_EQ(ex.y > 0, f.gold[f.candidates[i].binary_id] == GoldLabel::malicious);
    else
      EXPECT_EQ(ex.y, +1);
  }
}

TEST(ReviewLog, AppendOnlyAndCsv) {
  ReviewLog log;
  log.record("b", {GoldLabel::malicious, 2, 0.75});
  log.record("a", {GoldLabel::benign, 1, -0.5});
  EXPECT_THROW(log.record("a", {GoldLabel::malicious, 3, 0.0}), std::logic_error);
  std::ostringstream out;
  log.write_csv(out);
  EXPECT_EQ(out.str(), "binary_id,label,period,score\na,benign,1,-0.5\nb,malicious,2,0.75\n");
}

}  // namespace
}  // namespace mdetect
