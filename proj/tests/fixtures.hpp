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
// Six-candidate harmonization example: candidate 1 has five vendor
// detections, the others none; the current model scores candidates 2..6 at
// 2.0, 1.2, 0.9, 0.4 and 0.1. M = 1.25 and the budget is 2.

#include <map>
#include <string>
#include <vector>

#include "mdetect/reviewerloop.hpp"

namespace mdetect::testing {

struct SixCandidates {
  std::vector<Candidate> candidates;
  Model model;
  QueryPolicy policy;
  std::map<BinaryId, GoldLabel> gold;

  SixCandidates() {
    model.w = {3.0, 2.0, 1.2, 0.9, 0.4, 0.1};
    const int detections[] = {5, 0, 0, 0, 0, 0};
    const GoldLabel truth[] = {GoldLabel::malicious, GoldLabel::malicious, GoldLabel::malicious,
                               GoldLabel::benign,    GoldLabel::malicious, GoldLabel::benign};
    for (std::uint32_t i = 0; i < 6; ++i) {
      Candidate c;
      c.binary_id = "c" + std::to_string(i + 1);
      c.x = FeatureVector{6, {i}};
      c.x_current = FeatureVector{6, {i}};
      c.detections = detections[i];
      candidates.push_back(c);
      gold[c.binary_id] = truth[i];
    }
    policy.auto_relabel_threshold = 1.25;
    policy.consensus_threshold = 4;
  }

  GoldOracle oracle() const {
    return [this](const BinaryId& id) { return gold.at(id); };
  }
};

}  // namespace mdetect::testing
