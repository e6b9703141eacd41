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

// Scan-record data model: timestamped vendor verdicts plus attribute groups,
// grouped per binary, with gold and point-in-time labeling.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mdetect {

using BinaryId = std::string;
/// Seconds since the epoch.
using Timestamp = std::int64_t;

inline constexpr int kDefaultGoldThreshold = 4;
inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerWeek = 7 * kSecondsPerDay;

enum class AttributeKind { categorical, ordinal, text, sequence };

std::string_view to_string(AttributeKind kind);
std::optional<AttributeKind> parse_attribute_kind(std::string_view name);

struct Categorical {
  std::optional<std::string> value;
  bool operator==(const Categorical&) const = default;
};

struct Ordinal {
  std::uint64_t value = 0;
  bool operator==(const Ordinal&) const = default;
};

struct Text {
  std::string value;
  bool operator==(const Text&) const = default;
};

struct Sequence {
  std::vector<std::string> tokens;
  bool operator==(const Sequence&) const = default;
};

using AttributeValue = std::variant<Categorical, Ordinal, Text, Sequence>;

AttributeKind kind_of(const AttributeValue& value);

/// One submission of one binary.
struct ScanEvent {
  BinaryId binary_id;
  Timestamp time = 0;
  std::map<std::string, bool> vendor_verdicts;
  std::map<std::string, AttributeValue> attributes;

  /// Number of vendors reporting the binary as malicious.
  int detection_count() const;

  bool operator==(const ScanEvent&) const = default;
};

/// All events of one binary, ordered by (time, input order).
struct BinaryHistory {
  BinaryId binary_id;
  std::vector<ScanEvent> events;

  const ScanEvent& first() const { return events.front(); }
  const ScanEvent& last() const { return events.back(); }

  bool operator==(const BinaryHistory&) const = default;
};

struct CorpusHeader {
  std::map<std::string, AttributeKind> groups;
  std::vector<std::string> vendors;

  bool operator==(const CorpusHeader&) const = default;
};

struct Corpus {
  CorpusHeader header;
  /// Ordered by first appearance.
  std::vector<BinaryHistory> histories;

  std::size_t event_count() const;
  Timestamp min_time() const;
  Timestamp max_time() const;

  bool operator==(const Corpus&) const = default;
};

/// Reads the line-delimited corpus format: a JSON header line followed by
/// one JSON scan event per line. Throws ParseError with the offending line.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_file(const std::string& path);

/// Writes `corpus` with events in global (time, history, event) order.
/// parse_corpus of the output reproduces `corpus` whenever its histories are
/// ordered by first event time, which synth_corpus guarantees.
void serialize_corpus(const Corpus& corpus, std::ostream& out);

/// Serializes a single event as one line of the corpus format (no newline).
std::string serialize_event(const ScanEvent& event);

/// Parses one event line against `header`.
ScanEvent parse_event(std::string_view line, const CorpusHeader& header,
                      std::size_t line_number = 0);

enum class GoldLabel { benign, malicious };
enum class AsOfLabel { benign, malicious, unknown };

std::string_view to_string(GoldLabel label);
std::string_view to_string(AsOfLabel label);

/// Final-event vendor consensus: malicious iff the last event has at least
/// `gold_threshold` detections.
GoldLabel gold_label(const BinaryHistory& history,
                     int gold_threshold = kDefaultGoldThreshold);

/// Latest event with time <= t, or nullptr.
const ScanEvent* latest_event_at(const BinaryHistory& history, Timestamp t);

/// Label implied by the latest scan at or before `t`.
AsOfLabel label_as_of(const BinaryHistory& history, Timestamp t,
                      int gold_threshold = kDefaultGoldThreshold);

}  // namespace mdetect
