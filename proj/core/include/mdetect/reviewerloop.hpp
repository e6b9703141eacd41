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

#pragma once

// Training-label harmonization: vendor consensus, auto-relabeling above the
// margin threshold M, budgeted reviewer queries and default-benign labels.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "mdetect/corpus.hpp"
#include "mdetect/learner.hpp"

namespace mdetect {

struct ReviewerProfile {
  double tpr = 1.0;
  double fpr = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ReviewerProfile&) const = default;
};

/// Reviewer answer for one binary: malicious with probability tpr when the
/// gold label is malicious and fpr when it is benign. Consumes exactly one
/// 64-bit draw from `rng`.
GoldLabel simulate_review(GoldLabel gold, const ReviewerProfile& profile,
                          std::mt19937_64& rng);

/// Stateful reviewer holding the profile-seeded stream.
class SimulatedReviewer {
 public:
  explicit SimulatedReviewer(ReviewerProfile profile)
      : profile_(profile), rng_(profile.seed) {}

  GoldLabel review(GoldLabel gold) { return simulate_review(gold, profile_, rng_); }
  const ReviewerProfile& profile() const { return profile_; }

 private:
  ReviewerProfile profile_;
  std::mt19937_64 rng_;
};

enum class QueryStrategy { maliciousness, uncertainty };

std::string_view to_string(QueryStrategy strategy);
std::optional<QueryStrategy> parse_query_strategy(std::string_view name);

struct QueryPolicy {
  QueryStrategy strategy = QueryStrategy::maliciousness;
  double budget_per_day = 80.0;
  /// Auto-relabel threshold M, in margin units.
  double auto_relabel_threshold = 1.25;
  int consensus_threshold = kDefaultGoldThreshold;

  /// round(budget_per_day * period_days).
  std::int64_t budget_for(int period_days) const;
  void validate() const;

  bool operator==(const QueryPolicy&) const = default;
};

struct ReviewRecord {
  GoldLabel label = GoldLabel::benign;
  int period = 0;
  double score = 0.0;
};

/// Append-only record of every reviewer answer; a binary is reviewed once.
class ReviewLog {
 public:
  const ReviewRecord* find(const BinaryId& id) const;
  bool contains(const BinaryId& id) const { return find(id) != nullptr; }
  /// Throws std::logic_error if `id` was already reviewed.
  void record(const BinaryId& id, ReviewRecord record);

  std::size_t size() const { return records_.size(); }
  const std::map<BinaryId, ReviewRecord>& records() const { return records_; }

  /// CSV `binary_id,label,period,score`, ordered by binary id.
  void write_csv(std::ostream& out) const;

 private:
  std::map<BinaryId, ReviewRecord> records_;
};

struct Candidate {
  BinaryId binary_id;
  /// Vector under the dictionary being trained.
  FeatureVector x;
  /// Vector under the current model's dictionary; ignored without a model.
  FeatureVector x_current;
  /// Vendor detections known at training time.
  int detections = 0;
};

using GoldOracle = std::function<GoldLabel(const BinaryId&)>;

struct HarmonizeResult {
  /// One example per candidate, in candidate order.
  std::vector<TrainingExample> examples;
  int query_count = 0;
};

/// Assigns a training label to every candidate. Without `current_model` all
/// model scores are taken as 0 and auto-relabeling is skipped. New reviews are
/// appended to `log` under `period_index`. Throws DataError on duplicate ids.
HarmonizeResult harmonize_labels(std::span<const Candidate> candidates,
                                 const Model* current_model,
                                 const QueryPolicy& policy, std::int64_t budget,
                                 double review_weight, SimulatedReviewer& reviewer,
                                 const GoldOracle& gold, ReviewLog& log,
                                 int period_index);

}  // namespace mdetect
