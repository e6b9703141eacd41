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

// Attribute vectorization: categorical (with a null marker), exponential
// ordinal bins, canonicalized character trigrams and token n-grams, all
// mapped through a lexicographically ordered feature dictionary.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mdetect/corpus.hpp"

namespace mdetect {

enum class Scheme {
  categorical,
  null_marker,
  ordinal_bin,
  trigram,
  sorted_trigram,
  ngram1,
  ngram2,
  ngram3,
};

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

/// One binary feature, rendered as "group/scheme/token".
struct FeatureName {
  std::string group;
  Scheme scheme = Scheme::categorical;
  std::string token;

  std::string render() const;
  /// Inverse of render(); the token is everything after the second '/'.
  static FeatureName parse(std::string_view rendered);

  bool operator==(const FeatureName&) const = default;
};

/// Maps vowels to A/a, other ASCII letters to B/b and digits to 0; every
/// other character is kept.
std::string canonicalize(std::string_view s);

/// Canonical 3-grams of `s`; strings shorter than three characters yield the
/// whole canonical string. With `sorted`, each trigram's characters are sorted.
std::set<std::string> trigrams(std::string_view s, bool sorted);

/// "zero" for v == 0, otherwise the decimal i with base^i <= v < base^(i+1).
std::string ordinal_bin(std::uint64_t v, std::uint64_t base = 3);

struct GroupSpec {
  AttributeKind kind = AttributeKind::categorical;
  std::uint64_t ordinal_base = 3;
  bool sorted_trigrams = false;
  std::vector<int> ngram_orders{1, 2, 3};

  bool operator==(const GroupSpec&) const = default;
};

/// User-facing vectorizer knobs, resolved against a corpus header.
struct VectorizerOptions {
  std::uint64_t ordinal_base = 3;
  std::vector<int> ngram_orders{1, 2, 3};
  std::set<std::string> sorted_trigram_groups;
  std::map<std::string, std::uint64_t> ordinal_base_overrides;
  std::map<std::string, std::vector<int>> ngram_overrides;

  bool operator==(const VectorizerOptions&) const = default;
};

struct VectorizerSpec {
  std::map<std::string, GroupSpec> groups;

  /// Throws ConfigError when an option names an unknown group or a group of
  /// the wrong kind, or when a group name contains '/'.
  static VectorizerSpec from_header(const CorpusHeader& header,
                                    const VectorizerOptions& options = {});

  bool operator==(const VectorizerSpec&) const = default;
};

/// Every feature emitted by `event`, deduplicated and sorted by rendered name.
/// Groups declared in `spec` but missing from the event yield a null marker.
std::vector<FeatureName> extract_features(const ScanEvent& event,
                                          const VectorizerSpec& spec);

/// Same as extract_features, rendered.
std::vector<std::string> extract_rendered(const ScanEvent& event,
                                          const VectorizerSpec& spec);

/// Sparse binary vector: sorted active indices below `dims`.
struct FeatureVector {
  std::uint32_t dims = 0;
  std::vector<std::uint32_t> active;

  bool operator==(const FeatureVector&) const = default;
};

/// Bijection between rendered feature names (sorted) and [0, d).
class FeatureDictionary {
 public:
  FeatureDictionary() = default;
  /// Sorts and deduplicates `rendered_names`.
  explicit FeatureDictionary(std::vector<std::string> rendered_names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::uint32_t> index_of(std::string_view rendered) const;
  /// FNV-1a over the ordered names.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t fingerprint_ = 0;
};

FeatureDictionary build_dictionary(std::span<const ScanEvent> events,
                                   const VectorizerSpec& spec);

/// Names absent from `dict` are dropped.
FeatureVector vectorize(const ScanEvent& event, const VectorizerSpec& spec,
                        const FeatureDictionary& dict);

/// Interns every feature of every event in a corpus once. Global ids follow
/// rendered-name order, so any sorted subset of ids is itself a valid
/// dictionary ordering.
class FeatureCatalog {
 public:
  FeatureCatalog(const Corpus& corpus, const VectorizerSpec& spec);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t id) const { return names_[id]; }
  /// Sorted global ids of event `event` in history `history`.
  std::span<const std::uint32_t> features(std::size_t history,
                                          std::size_t event) const;

  /// Dictionary over the given sorted, unique global ids.
  FeatureDictionary dictionary(std::span<const std::uint32_t> ids) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> history_offset_;
  std::vector<std::size_t> event_offset_;
  std::vector<std::uint32_t> ids_;
};

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace mdetect
