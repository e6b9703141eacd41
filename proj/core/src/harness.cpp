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

#include "mdetect/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "mdetect/errors.hpp"

namespace mdetect {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::cross_validation: return "cross_validation";
    case Regime::temporal_sample: return "temporal_sample";
    case Regime::temporal_label: return "temporal_label";
    case Regime::label_release: return "label_release";
  }
  return "unknown";
}

std::optional<Regime> parse_regime(std::string_view name) {
  for (Regime r : {Regime::cross_validation, Regime::temporal_sample, Regime::temporal_label,
                   Regime::label_release})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (period_days < 1) throw ConfigError("period_days must be at least 1");
  if (bootstrap_periods < 1) throw ConfigError("bootstrap_periods must be at least 1");
  if (gold_threshold < 1) throw ConfigError("gold_threshold must be at least 1");
  if (regime == Regime::label_release) {
    if (!release_delay_days)
      throw ConfigError("release_delay_days is required for regime label_release");
    if (*release_delay_days < 0) throw ConfigError("release_delay_days must be non-negative");
  } else if (release_delay_days) {
    throw ConfigError("release_delay_days is only valid for regime label_release");
  }
  if (regime == Regime::cross_validation) {
    if (folds && *folds < 2) throw ConfigError("folds must be at least 2");
  } else if (folds) {
    throw ConfigError("folds is only valid for regime cross_validation");
  }
  policy.validate();
  profile.validate();
  hyper.validate();
}

int period_count(const Corpus& corpus, int period_days) {
  if (corpus.histories.empty()) return 0;
  const Timestamp span = corpus.max_time() - corpus.min_time();
  return static_cast<int>(span / (period_days * kSecondsPerDay) + 1);
}

namespace {

// Feature space of one period: a sorted subset of catalog ids.
class PeriodSpace {
 public:
  PeriodSpace(const FeatureCatalog& catalog, std::vector<std::uint32_t> ids)
      : ids_(std::move(ids)), local_(catalog.size(), -1) {
    for (std::size_t i = 0; i < ids_.size(); ++i)
      local_[ids_[i]] = static_cast<std::int32_t>(i);
  }

  std::uint32_t dims() const { return static_cast<std::uint32_t>(ids_.size()); }
  const std::vector<std::uint32_t>& ids() const { return ids_; }

  FeatureVector map(std::span<const std::uint32_t> global) const {
    FeatureVector v;
    v.dims = dims();
    for (auto id : global)
      if (local_[id] >= 0) v.active.push_back(static_cast<std::uint32_t>(local_[id]));
    return v;  // sorted: local order follows global order
  }

 private:
  std::vector<std::uint32_t> ids_;
  std::vector<std::int32_t> local_;
};

struct EventRef {
  std::size_t history;
  std::size_t event;
};

struct LabeledBinary {
  std::size_t history;
  std::size_t rep_event;  // event whose attributes stand for the binary
  int y;
  double weight;
  Provenance provenance;
};

class Runner {
 public:
  Runner(const Corpus& corpus, const ExperimentConfig& config, RunOptions options)
      : corpus_(corpus),
        config_(config),
        options_(options),
        spec_(VectorizerSpec::from_header(corpus.header, config.vectorizer)),
        catalog_(corpus, spec_) {
    gold_.reserve(corpus.histories.size());
    for (const auto& h : corpus.histories) gold_.push_back(gold_label(h, config.gold_threshold));
  }

  ExperimentResult run() {
    if (config_.regime == Regime::cross_validation) return run_cross_validation();
    return run_temporal();
  }

 private:
  PeriodSpace space_for(std::span<const LabeledBinary> binaries) const {
    std::vector<std::uint32_t> ids;
    for (const auto& b : binaries) {
      auto f = catalog_.features(b.history, b.rep_event);
      ids.insert(ids.end(), f.begin(), f.end());
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return PeriodSpace(catalog_, std::move(ids));
  }

  void require_both_classes(std::span<const TrainingExample> examples,
                            const std::string& period) const {
    bool pos = false, neg = false;
    for (const auto& ex : examples) (ex.y > 0 ? pos : neg) = true;
    if (!pos || !neg)
      throw DataError(period + ": training labels are all " +
                      (pos ? "malicious" : "benign") + "; cannot train");
  }

  Evaluation evaluate(const Model& model, const PeriodSpace& space, EventRef ref) const {
    const auto& h = corpus_.histories[ref.history];
    Evaluation ev;
    ev.binary_id = h.binary_id;
    ev.time = h.events[ref.event].time;
    ev.score = score(model, space.map(catalog_.features(ref.history, ref.event)));
    ev.gold = gold_[ref.history];
    ev.first_appearance = ref.event == 0;
    ev.vendor_detected_at_first = h.first().detection_count() > 0;
    return ev;
  }

  // Same value as FeatureDictionary::fingerprint over the space's names.
  std::uint64_t fingerprint_of(const PeriodSpace& space) const {
    std::uint64_t h = fnv1a64("");
    for (auto id : space.ids()) h = fnv1a64("\n", fnv1a64(catalog_.name(id), h));
    return h;
  }

  TrainResult fit(std::span<const TrainingExample> examples, const PeriodSpace& space) const {
    return train(examples, space.dims(), config_.hyper, fingerprint_of(space));
  }

  void keep(ExperimentResult& result, int period, const PeriodSpace& space,
            const TrainResult& trained) const {
    if (!options_.keep_artifacts) return;
    result.artifacts.push_back(
        {period, trained.model, catalog_.dictionary(space.ids()), trained.report});
  }

  ExperimentResult run_temporal() {
    const int n_periods = period_count(corpus_, config_.period_days);
    const int required = config_.bootstrap_periods + 1;
    if (n_periods < required)
      throw DataError("corpus spans " + std::to_string(n_periods) + " period(s) of " +
                      std::to_string(config_.period_days) + " days; at least " +
                      std::to_string(required) + " (bootstrap_periods + 1) are required");

    const Timestamp t0 = corpus_.min_time();
    const Timestamp period_secs = config_.period_days * kSecondsPerDay;
    std::vector<std::vector<EventRef>> by_period(n_periods);
    for (std::size_t h = 0; h < corpus_.histories.size(); ++h)
      for (std::size_t e = 0; e < corpus_.histories[h].events.size(); ++e)
        by_period[(corpus_.histories[h].events[e].time - t0) / period_secs].push_back({h, e});

    // Histories ordered by first appearance time; training sets are prefixes.
    std::vector<std::size_t> by_first(corpus_.histories.size());
    for (std::size_t i = 0; i < by_first.size(); ++i) by_first[i] = i;
    std::stable_sort(by_first.begin(), by_first.end(), [&](std::size_t a, std::size_t b) {
      return corpus_.histories[a].first().time < corpus_.histories[b].first().time;
    });

    ExperimentResult result;
    SimulatedReviewer reviewer(config_.profile);
    GoldOracle oracle = [this](const BinaryId& id) {
      return gold_[index_of(id)];
    };
    for (std::size_t h = 0; h < corpus_.histories.size(); ++h)
      id_index_.emplace(corpus_.histories[h].binary_id, h);

    std::optional<Model> prev_model;
    std::optional<PeriodSpace> prev_space;

    for (int p = config_.bootstrap_periods; p < n_periods; ++p) {
      const Timestamp start = t0 + p * period_secs;
      const std::string period_name = "period " + std::to_string(p);

      std::vector<std::size_t> members;
      for (std::size_t h : by_first) {
        if (corpus_.histories[h].first().time >= start) break;
        members.push_back(h);
      }

      TrainingAudit audit;
      audit.period_index = p;
      audit.period_start = start;
      audit.latest_sample_time = std::numeric_limits<Timestamp>::min();
      audit.latest_label_time = std::numeric_limits<Timestamp>::min();

      std::vector<LabeledBinary> binaries;
      binaries.reserve(members.size());
      for (std::size_t h : members) {
        binaries.push_back({h, 0, -1, 1.0, Provenance::default_benign});
        audit.latest_sample_time =
            std::max(audit.latest_sample_time, corpus_.histories[h].first().time);
      }
      PeriodSpace space = space_for(binaries);

      std::vector<TrainingExample> examples(binaries.size());
      PeriodResult period;
      period.period_index = p;

      auto gold_example = [&](std::size_t i) {
        const std::size_t h = binaries[i].history;
        const bool malicious = gold_[h] == GoldLabel::malicious;
        examples[i] = {space.map(catalog_.features(h, 0)), malicious ? +1 : -1, 1.0,
                       malicious ? Provenance::vendor_consensus : Provenance::default_benign};
        audit.latest_label_time =
            std::max(audit.latest_label_time, corpus_.histories[h].last().time);
      };

      if (config_.regime == Regime::temporal_sample) {
        for (std::size_t i = 0; i < binaries.size(); ++i) gold_example(i);
      } else {
        const bool releases = config_.regime == Regime::label_release;
        const Timestamp delay =
            releases ? *config_.release_delay_days * kSecondsPerDay : 0;
        std::vector<Candidate> candidates;
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < binaries.size(); ++i) {
          const std::size_t h = binaries[i].history;
          const auto& history = corpus_.histories[h];
          if (releases && start - history.first().time >= delay) {
            gold_example(i);
            continue;
          }
          const ScanEvent* known = latest_event_at(history, start - 1);
          audit.latest_label_time = std::max(audit.latest_label_time, known->time);
          Candidate c;
          c.binary_id = history.binary_id;
          c.x = space.map(catalog_.features(h, 0));
          if (prev_space) c.x_current = prev_space->map(catalog_.features(h, 0));
          c.detections = known->detection_count();
          candidates.push_back(std::move(c));
          slots.push_back(i);
        }
        period.budget = config_.policy.budget_for(config_.period_days);
        HarmonizeResult harmonized = harmonize_labels(
            candidates, prev_model ? &*prev_model : nullptr, config_.policy, period.budget,
            config_.hyper.w_review, reviewer, oracle, result.review_log, p);
        for (std::size_t k = 0; k < slots.size(); ++k)
          examples[slots[k]] = std::move(harmonized.examples[k]);
        period.query_count = harmonized.query_count;
      }

      require_both_classes(examples, period_name);
      audit.n_examples = examples.size();
      audit.n_positive = static_cast<std::size_t>(std::count_if(
          examples.begin(), examples.end(), [](const auto& ex) { return ex.y > 0; }));

      TrainResult trained = fit(examples, space);
      period.model_fingerprint = trained.model.fingerprint();
      period.evaluations.reserve(by_period[p].size());
      for (const auto& ref : by_period[p])
        period.evaluations.push_back(evaluate(trained.model, space, ref));

      result.periods.push_back(std::move(period));
      result.audits.push_back(audit);
      keep(result, p, space, trained);
      prev_model = std::move(trained.model);
      prev_space = std::move(space);
    }
    return result;
  }

  ExperimentResult run_cross_validation() {
    const int k = config_.fold_count();
    std::vector<EventRef> events;
    for (std::size_t h = 0; h < corpus_.histories.size(); ++h)
      for (std::size_t e = 0; e < corpus_.histories[h].events.size(); ++e)
        events.push_back({h, e});
    if (events.size() < static_cast<std::size_t>(k))
      throw DataError("corpus has " + std::to_string(events.size()) +
                      " events; cross-validation needs at least folds = " + std::to_string(k));

    // Fisher-Yates with an explicit draw so the partition is portable.
    std::mt19937_64 rng(config_.seed);
    for (std::size_t i = events.size(); i > 1; --i) {
      const std::uint64_t bound = i;
      const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                  std::numeric_limits<std::uint64_t>::max() % bound;
      std::uint64_t r;
      do r = rng(); while (r >= limit);
      std::swap(events[i - 1], events[r % bound]);
    }
    std::vector<std::vector<EventRef>> folds(k);
    for (std::size_t i = 0; i < events.size(); ++i) folds[i % k].push_back(events[i]);
    for (auto& fold : folds)
      std::sort(fold.begin(), fold.end(), [](const EventRef& a, const EventRef& b) {
        return a.history != b.history ? a.history < b.history : a.event < b.event;
      });

    ExperimentResult result;
    for (int f = 0; f < k; ++f) {
      // First training-fold event of each binary stands in for it.
      constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
      std::vector<std::size_t> rep(corpus_.histories.size(), kNone);
      for (int g = 0; g < k; ++g) {
        if (g == f) continue;
        for (const auto& ref : folds[g])
          rep[ref.history] = std::min(rep[ref.history], ref.event);
      }
      std::vector<LabeledBinary> binaries;
      TrainingAudit audit;
      audit.period_index = f;
      audit.latest_sample_time = std::numeric_limits<Timestamp>::min();
      audit.latest_label_time = std::numeric_limits<Timestamp>::min();
      for (std::size_t h = 0; h < rep.size(); ++h) {
        if (rep[h] == kNone) continue;
        const bool malicious = gold_[h] == GoldLabel::malicious;
        binaries.push_back({h, rep[h], malicious ? +1 : -1, 1.0,
                            malicious ? Provenance::vendor_consensus
                                      : Provenance::default_benign});
        const auto& history = corpus_.histories[h];
        audit.latest_sample_time =
            std::max(audit.latest_sample_time, history.events[rep[h]].time);
        audit.latest_label_time = std::max(audit.latest_label_time, history.last().time);
      }
      PeriodSpace space = space_for(binaries);
      std::vector<TrainingExample> examples;
      examples.reserve(binaries.size());
      for (const auto& b : binaries)
        examples.push_back({space.map(catalog_.features(b.history, b.rep_event)), b.y,
                            b.weight, b.provenance});
      require_both_classes(examples, "fold " + std::to_string(f));
      audit.n_examples = examples.size();
      audit.n_positive = static_cast<std::size_t>(std::count_if(
          examples.begin(), examples.end(), [](const auto& ex) { return ex.y > 0; }));

      TrainResult trained = fit(examples, space);
      PeriodResult period;
      period.period_index = f;
      period.model_fingerprint = trained.model.fingerprint();
      for (const auto& ref : folds[f])
        period.evaluations.push_back(evaluate(trained.model, space, ref));
      result.periods.push_back(std::move(period));
      result.audits.push_back(audit);
      keep(result, f, space, trained);
    }
    return result;
  }

  std::size_t index_of(const BinaryId& id) const {
    auto it = id_index_.find(id);
    if (it == id_index_.end()) throw std::logic_error("unknown binary '" + id + "'");
    return it->second;
  }

  const Corpus& corpus_;
  const ExperimentConfig& config_;
  RunOptions options_;
  VectorizerSpec spec_;
  FeatureCatalog catalog_;
  std::vector<GoldLabel> gold_;
  std::unordered_map<std::string, std::size_t> id_index_;
};

}  // namespace

ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config,
                                RunOptions options) {
  config.validate();
  if (corpus.histories.empty()) throw DataError("corpus holds no scan events");
  Runner runner(corpus, config, options);
  return runner.run();
}

RocCurve aggregate_roc(std::span<const PeriodResult> results) {
  std::vector<ScoredLabel> pool;
  for (const auto& p : results)
    for (const auto& e : p.evaluations)
      pool.push_back({e.score, e.gold == GoldLabel::malicious});
  return roc(pool);
}

std::vector<NovelSampleMetrics> novel_sample_metrics(std::span<const PeriodResult> results,
                                                     std::span<const double> target_fprs) {
  const RocCurve curve = aggregate_roc(results);
  std::vector<NovelSampleMetrics> out;
  for (double target : target_fprs) {
    NovelSampleMetrics m;
    m.target_fpr = target;
    m.threshold = operating_threshold(curve, target);
    std::size_t novel_hits = 0, benign_hits = 0;
    for (const auto& p : results) {
      for (const auto& e : p.evaluations) {
        if (!e.first_appearance || e.vendor_detected_at_first) continue;
        const bool flagged = e.score >= m.threshold;
        if (e.gold == GoldLabel::malicious) {
          ++m.novel_count;
          novel_hits += flagged;
        } else {
          ++m.benign_count;
          benign_hits += flagged;
        }
      }
    }
    if (m.novel_count)
      m.novel_detection_rate = static_cast<double>(novel_hits) / m.novel_count;
    if (m.benign_count)
      m.benign_false_positive_rate = static_cast<double>(benign_hits) / m.benign_count;
    out.push_back(m);
  }
  return out;
}

std::vector<GroupImportance> importance(
    std::span<const double> w, std::span<const FeatureVector> instances,
    const std::map<std::string, std::vector<std::uint32_t>>& groups) {
  if (instances.empty()) throw DataError("importance: no instances");
  std::vector<std::vector<std::size_t>> groups_of(w.size());
  std::vector<std::string> names;
  for (const auto& [name, indices] : groups) {
    for (auto k : indices) {
      if (k >= w.size())
        throw std::invalid_argument("importance: group '" + name + "' index out of range");
      groups_of[k].push_back(names.size());
    }
    names.push_back(name);
  }

  const std::size_t n = instances.size();
  std::vector<std::vector<double>> partial(names.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (instances[i].dims != w.size())
      throw std::invalid_argument("importance: instance dims do not match the model");
    for (auto k : instances[i].active)
      for (auto g : groups_of[k]) partial[g][i] += w[k];
  }

  std::vector<GroupImportance> out;
  for (std::size_t g = 0; g < names.size(); ++g) {
    double mean = 0;
    for (double v : partial[g]) mean += v;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double v : partial[g]) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    out.push_back({names[g], std::sqrt(var)});
  }
  std::sort(out.begin(), out.end(), [](const GroupImportance& a, const GroupImportance& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.group < b.group;
  });
  return out;
}

std::map<std::string, std::vector<std::uint32_t>> feature_groups(const FeatureDictionary& dict) {
  std::map<std::string, std::vector<std::uint32_t>> out;
  for (std::uint32_t i = 0; i < dict.size(); ++i)
    out[FeatureName::parse(dict.names()[i]).group].push_back(i);
  return out;
}

}  // namespace mdetect
