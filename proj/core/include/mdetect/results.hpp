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

// Results directory layout:
//   periods.csv      period,query_count,n_eval
//   scores.csv       binary_id,time,period,score,gold,first_appearance,vendor_detected_at_first
//   roc.csv          threshold,fpr,tpr
//   review_log.csv   binary_id,label,period,score
//   model_<p>.bin    weights of the period-p model
//   dict_<p>.txt     rendered feature names of the period-p dictionary

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mdetect/format.hpp"
#include "mdetect/harness.hpp"

namespace mdetect {

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Writes every results file. Model and dictionary files are written for the
/// periods present in `result.artifacts`.
void write_results(const std::filesystem::path& dir, const ExperimentResult& result);

struct PeriodSummary {
  int period = 0;
  int query_count = 0;
  std::size_t n_eval = 0;
};

/// Throws DataError when the file is missing or malformed.
std::vector<PeriodResult> read_scores(const std::filesystem::path& dir);
std::vector<PeriodSummary> read_periods(const std::filesystem::path& dir);
FeatureDictionary read_dictionary(const std::filesystem::path& path);
Model read_model_file(const std::filesystem::path& path);

std::filesystem::path model_path(const std::filesystem::path& dir, int period);
std::filesystem::path dictionary_path(const std::filesystem::path& dir, int period);

}  // namespace mdetect
