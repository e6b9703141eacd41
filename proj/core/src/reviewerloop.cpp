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

#include "mdetect/reviewerloop.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "mdetect/errors.hpp"
#include "mdetect/format.hpp"

namespace mdetect {

void ReviewerProfile::validate() const {
  if (!(tpr >= 0 && tpr <= 1)) throw ConfigError("reviewer_tpr must be in [0, 1]");
  if (!(fpr >= 0 && fpr <= 1)) throw ConfigError("reviewer_fpr must be in [0, 1]");
}

GoldLabel simulate_review(GoldLabel gold, const ReviewerProfile& profile,
                          std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const double p_malicious = gold == GoldLabel::malicious ? profile.tpr : profile.fpr;
  return u < p_malicious ? GoldLabel::malicious : GoldLabel::benign;
}

std::string_view to_string(QueryStrategy strategy) {
  return strategy == QueryStrategy::maliciousness ? "maliciousness" : "uncertainty";
}

std::optional<QueryStrategy> parse_query_strategy(std::string_view name) {
  if (name == "maliciousness") return QueryStrategy::maliciousness;
  if (name == "uncertainty") return QueryStrategy::uncertainty;
  return std::nullopt;
}

std::int64_t QueryPolicy::budget_for(int period_days) const {
  return std::llround(budget_per_day * period_days);
}

void QueryPolicy::validate() const {
  if (!(budget_per_day >= 0) || !std::isfinite(budget_per_day))
    throw ConfigError("budget_per_day must be a non-negative number");
  if (std::isnan(auto_relabel_threshold))
    throw ConfigError("auto_relabel_threshold must be a number");
  if (consensus_threshold < 1) throw ConfigError("consensus_threshold must be at least 1");
}

const ReviewRecord* ReviewLog::find(const BinaryId& id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

void ReviewLog::record(const BinaryId& id, ReviewRecord record) {
  if (!records_.emplace(id, record).second)
    throw std::logic_error("binary '" + id + "' was already reviewed");
}

void ReviewLog::write_csv(std::ostream& out) const {
  out << "binary_id,label,period,score\n";
  for (const auto& [id, r] : records_)
    out << id << ',' << to_string(r.label) << ',' << r.period << ','
        << format_double(r.score) << '\n';
}

namespace {

TrainingExample reviewed_example(const FeatureVector& x, GoldLabel label,
                                 double review_weight) {
  if (label == GoldLabel::malicious) return {x, +1, 1.0, Provenance::reviewer};
  return {x, -1, review_weight, Provenance::reviewer};
}

}  // namespace

HarmonizeResult harmonize_labels(std::span<const Candidate> candidates,
                                 const Model* current_model, const QueryPolicy& policy,
                                 std::int64_t budget, double review_weight,
                                 SimulatedReviewer& reviewer, const GoldOracle& gold,
                                 ReviewLog& log, int period_index) {
  std::unordered_set<std::string_view> seen;
  for (const auto& c : candidates)
    if (!seen.insert(c.binary_id).second)
      throw DataError("duplicate candidate '" + c.binary_id + "' in period " +
                      std::to_string(period_index));

  const std::size_t n = candidates.size();
  std::vector<double> scores(n, 0.0);
  if (current_model)
    for (std::size_t i = 0; i < n; ++i) scores[i] = score(*current_model, candidates[i].x_current);

  HarmonizeResult result;
  result.examples.resize(n);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < n; ++i) {
    const Candidate& c = candidates[i];
    if (const ReviewRecord* prior = log.find(c.binary_id)) {
      result.examples[i] = reviewed_example(c.x, prior->label, review_weight);
    } else if (c.detections >= policy.consensus_threshold) {
      result.examples[i] = {c.x, +1, 1.0, Provenance::vendor_consensus};
    } else if (current_model && scores[i] > policy.auto_relabel_threshold) {
      result.examples[i] = {c.x, +1, 1.0, Provenance::auto_relabel};
    } else {
      eligible.push_back(i);
    }
  }

  std::vector<std::size_t> ranked = eligible;
  auto by_id = [&](std::size_t a, std::size_t b) {
    return candidates[a].binary_id < candidates[b].binary_id;
  };
  if (policy.strategy == QueryStrategy::maliciousness) {
    std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return by_id(a, b);
    });
  } else {
    std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      double da = std::abs(scores[a]), db = std::abs(scores[b]);
      if (da != db) return da < db;
      return by_id(a, b);
    });
  }
  const auto n_queries =
      static_cast<std::size_t>(std::clamp<std::int64_t>(budget, 0, ranked.size()));
  std::vector<char> queried(n, 0);
  for (std::size_t k = 0; k < n_queries; ++k) queried[ranked[k]] = 1;

  for (std::size_t i : eligible) {
    const Candidate& c = candidates[i];
    if (queried[i]) {
      GoldLabel answer = reviewer.review(gold(c.binary_id));
      log.record(c.binary_id, {answer, period_index, scores[i]});
      result.examples[i] = reviewed_example(c.x, answer, review_weight);
      ++result.query_count;
    } else {
      result.examples[i] = {c.x, -1, 1.0, Provenance::default_benign};
    }
  }
  return result;
}

}  // namespace mdetect
