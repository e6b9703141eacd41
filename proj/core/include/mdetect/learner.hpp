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

// Class- and example-weighted L2-regularized logistic regression over sparse
// binary vectors, plus ROC sweeps over raw margins.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mdetect/vectorizer.hpp"

namespace mdetect {

struct Hyperparams {
  /// Loss weight of benign (y = -1) examples.
  double c_neg = 0.16;
  /// Loss weight of malicious (y = +1) examples.
  double c_pos = 0.0048;
  /// Example weight for binaries a reviewer labeled benign.
  double w_review = 10.0;
  /// Absolute stopping tolerance on the gradient infinity norm. When unset,
  /// 1e-6 times the number of training examples is used.
  std::optional<double> convergence_tol;
  int max_iters = 500;

  double tolerance_for(std::size_t n_examples) const;
  /// Throws ConfigError.
  void validate() const;

  bool operator==(const Hyperparams&) const = default;
};

enum class Provenance { vendor_consensus, auto_relabel, reviewer, default_benign };

std::string_view to_string(Provenance provenance);

struct TrainingExample {
  FeatureVector x;
  int y = -1;  // -1 benign, +1 malicious
  double weight = 1.0;
  Provenance provenance = Provenance::default_benign;
};

struct Model {
  std::vector<double> w;
  std::uint64_t dict_fingerprint = 0;
  Hyperparams hyper;

  /// Hash of the weights and the dictionary fingerprint.
  std::uint64_t fingerprint() const;

  bool operator==(const Model&) const = default;
};

/// log(1 + exp(-z)), stable for large |z|.
double logistic_loss(double z);

double loss(std::span<const double> w, std::span<const TrainingExample> examples,
            const Hyperparams& hyper);

std::vector<double> gradient(std::span<const double> w,
                             std::span<const TrainingExample> examples,
                             const Hyperparams& hyper);

/// Loss and gradient in one pass; `grad` is resized to |w|.
double loss_and_gradient(std::span<const double> w,
                         std::span<const TrainingExample> examples,
                         const Hyperparams& hyper, std::vector<double>& grad);

struct TrainReport {
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // infinity norm at the returned weights
  double tolerance = 0.0;
  /// Objective at the start point and after every accepted step.
  std::vector<double> objective_trace;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

/// Limited-memory quasi-Newton descent from w = 0 with backtracking line
/// search. Stops once the gradient infinity norm reaches the tolerance or
/// after max_iters. Throws DataError on a non-finite objective.
TrainResult train(std::span<const TrainingExample> examples, std::size_t d,
                  const Hyperparams& hyper, std::uint64_t dict_fingerprint = 0);

/// Raw margin w'x.
double score(std::span<const double> w, const FeatureVector& x);
double score(const Model& model, const FeatureVector& x);

/// Binary model file: magic, version, d, hyperparameters, dictionary
/// fingerprint, then d little-endian doubles.
void write_model(const Model& model, std::ostream& out);
Model read_model(std::istream& in);

struct RocPoint {
  double threshold = 0.0;  // flag when score >= threshold
  double fpr = 0.0;
  double tpr = 0.0;

  bool operator==(const RocPoint&) const = default;
};

/// One point per distinct score, thresholds strictly decreasing. The
/// (+inf, 0, 0) origin is implied; the last point always has fpr = tpr = 1.
struct RocCurve {
  std::vector<RocPoint> points;

  bool operator==(const RocCurve&) const = default;
};

struct ScoredLabel {
  double score = 0.0;
  bool malicious = false;
};

/// Threshold sweep. Throws DataError unless both classes are present.
RocCurve roc(std::span<const ScoredLabel> scores);

/// Largest tpr over points with fpr <= target (0 when there are none).
double detection_at_fpr(const RocCurve& curve, double target_fpr);

/// Lowest threshold whose fpr stays within `target_fpr`; +inf when even the
/// highest threshold exceeds it.
double operating_threshold(const RocCurve& curve, double target_fpr);

/// CSV with header `threshold,fpr,tpr`.
void write_roc_csv(const RocCurve& curve, std::ostream& out);

}  // namespace mdetect
