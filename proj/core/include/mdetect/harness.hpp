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

// Rolling-window retraining and evaluation under four labeling regimes,
// pooled metrics and feature-group importance.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdetect/corpus.hpp"
#include "mdetect/learner.hpp"
#include "mdetect/reviewerloop.hpp"
#include "mdetect/vectorizer.hpp"

namespace mdetect {

enum class Regime { cross_validation, temporal_sample, temporal_label, label_release };

std::string_view to_string(Regime regime);
std::optional<Regime> parse_regime(std::string_view name);

struct ExperimentConfig {
  int period_days = 7;
  Regime regime = Regime::temporal_label;
  /// Required for label_release only.
  std::optional<int> release_delay_days;
  /// cross_validation only; 10 when unset.
  std::optional<int> folds;
  QueryPolicy policy;
  ReviewerProfile profile;
  Hyperparams hyper;
  VectorizerOptions vectorizer;
  int gold_threshold = kDefaultGoldThreshold;
  int bootstrap_periods = 1;
  std::uint64_t seed = 0;

  int fold_count() const { return folds.value_or(10); }
  /// Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct Evaluation {
  BinaryId binary_id;
  Timestamp time = 0;
  double score = 0.0;
  GoldLabel gold = GoldLabel::benign;
  bool first_appearance = false;
  bool vendor_detected_at_first = false;
};

struct PeriodResult {
  int period_index = 0;
  std::uint64_t model_fingerprint = 0;
  std::vector<Evaluation> evaluations;
  int query_count = 0;
  std::int64_t budget = 0;
};

/// What a period's model was trained on, for audits of label timing.
struct TrainingAudit {
  int period_index = 0;
  Timestamp period_start = 0;
  /// Latest event time among training feature sources.
  Timestamp latest_sample_time = 0;
  /// Latest scan event any training label was derived from. Gold labels from
  /// the final scan count at that scan's time.
  Timestamp latest_label_time = 0;
  std::size_t n_examples = 0;
  std::size_t n_positive = 0;
};

struct PeriodArtifacts {
  int period_index = 0;
  Model model;
  FeatureDictionary dictionary;
  TrainReport report;
};

struct ExperimentResult {
  std::vector<PeriodResult> periods;
  std::vector<TrainingAudit> audits;
  ReviewLog review_log;
  /// Filled only with RunOptions::keep_artifacts.
  std::vector<PeriodArtifacts> artifacts;
};

struct RunOptions {
  bool keep_artifacts = false;
};

/// Number of retraining periods covering the corpus.
int period_count(const Corpus& corpus, int period_days);

/// Throws ConfigError for an invalid config and DataError when the corpus is
/// too short or a period's training labels are all one class.
ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config,
                                RunOptions options = {});

/// Pools every (score, gold) pair into one sweep. Throws DataError when the
/// pool holds a single class.
RocCurve aggregate_roc(std::span<const PeriodResult> results);

struct NovelSampleMetrics {
  double target_fpr = 0.0;
  double threshold = 0.0;
  /// Absent when the corpus holds no novel malicious samples.
  std::optional<double> novel_detection_rate;
  /// Absent when there are no initially undetected benign samples.
  std::optional<double> benign_false_positive_rate;
  std::size_t novel_count = 0;
  std::size_t benign_count = 0;
};

/// Detection of first-appearance malicious events with zero vendor
/// detections, and the false-positive counterpart on benign ones, at the
/// pooled-ROC threshold for each target.
std::vector<NovelSampleMetrics> novel_sample_metrics(
    std::span<const PeriodResult> results, std::span<const double> target_fprs);

struct GroupImportance {
  std::string group;
  double importance = 0.0;
};

/// sqrt of the population variance over instances of each group's partial
/// score, sorted descending with ties by name. Throws DataError when
/// `instances` is empty.
std::vector<GroupImportance> importance(
    std::span<const double> w, std::span<const FeatureVector> instances,
    const std::map<std::string, std::vector<std::uint32_t>>& groups);

/// Partition of a dictionary's indices by feature group.
std::map<std::string, std::vector<std::uint32_t>> feature_groups(
    const FeatureDictionary& dict);

}  // namespace mdetect
