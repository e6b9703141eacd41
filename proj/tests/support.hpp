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
// Fixtures shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mdetect/corpus.hpp"
#include "mdetect/learner.hpp"

namespace mdetect::testing {

/// Four groups, one of each kind, and six vendors v0..v5.
inline CorpusHeader tiny_header() {
  CorpusHeader h;
  h.groups = {{"api", AttributeKind::sequence},
              {"name", AttributeKind::text},
              {"signer", AttributeKind::categorical},
              {"size", AttributeKind::ordinal}};
  for (int v = 0; v < 6; ++v) h.vendors.push_back("v" + std::to_string(v));
  return h;
}

/// Event with the first `detections` vendors of `header` flagging it.
inline ScanEvent make_event(const CorpusHeader& header, const std::string& id, Timestamp time,
                            int detections,
                            std::map<std::string, AttributeValue> attrs = {}) {
  ScanEvent e;
  e.binary_id = id;
  e.time = time;
  for (std::size_t v = 0; v < header.vendors.size(); ++v)
    e.vendor_verdicts[header.vendors[v]] = static_cast<int>(v) < detections;
  e.attributes = std::move(attrs);
  return e;
}

inline BinaryHistory make_history(std::vector<ScanEvent> events) {
  BinaryHistory h;
  h.binary_id = events.front().binary_id;
  h.events = std::move(events);
  return h;
}

/// Random sparse examples over `d` features.
inline std::vector<TrainingExample> random_examples(std::mt19937_64& rng, std::size_t d,
                                                    std::size_t n, double density,
                                                    bool unit_weights) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample ex;
    ex.x.dims = static_cast<std::uint32_t>(d);
    for (std::uint32_t k = 0; k < d; ++k)
      if (u(rng) < density) ex.x.active.push_back(k);
    ex.y = u(rng) < 0.5 ? 1 : -1;
    ex.weight = unit_weights ? 1.0 : (u(rng) < 0.3 ? 10.0 : 1.0);
    out.push_back(std::move(ex));
  }
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mdetect_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mdetect::testing
