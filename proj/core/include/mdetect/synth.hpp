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

#include <cstdint>

#include "mdetect/corpus.hpp"

namespace mdetect {

/// Parameters of the synthetic drifting corpus generator.
struct SynthConfig {
  int n_binaries = 10000;
  int n_weeks = 26;
  double malicious_fraction = 0.4;
  int n_families = 40;
  /// Per-week probability that a family mutates its feature signature.
  double drift_rate = 0.3;
  /// Mean delay before vendors start detecting a malicious binary.
  int vendor_lag_weeks = 4;
  int n_vendors = 32;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// First timestamp emitted by the generator (2013-01-01T00:00:00Z).
inline constexpr Timestamp kSynthEpoch = 1356998400;

/// Deterministic function of `config`. Malicious binaries belong to families
/// whose signatures drift week over week; their vendor verdicts start mostly
/// clean and flip to detected after a per-binary delay. Every binary's last
/// event carries its mature verdicts.
Corpus synth_corpus(const SynthConfig& config);

}  // namespace mdetect
