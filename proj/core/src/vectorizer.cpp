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

#include "mdetect/vectorizer.hpp"

#include <algorithm>
#include <unordered_map>

#include "mdetect/errors.hpp"

namespace mdetect {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::categorical: return "categorical";
    case Scheme::null_marker: return "null_marker";
    case Scheme::ordinal_bin: return "ordinal_bin";
    case Scheme::trigram: return "trigram";
    case Scheme::sorted_trigram: return "sorted_trigram";
    case Scheme::ngram1: return "ngram1";
    case Scheme::ngram2: return "ngram2";
    case Scheme::ngram3: return "ngram3";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::categorical, Scheme::null_marker, Scheme::ordinal_bin,
                   Scheme::trigram, Scheme::sorted_trigram, Scheme::ngram1,
                   Scheme::ngram2, Scheme::ngram3})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::string FeatureName::render() const {
  std::string out;
  auto scheme_name = to_string(scheme);
  out.reserve(group.size() + scheme_name.size() + token.size() + 2);
  out.append(group).append(1, '/').append(scheme_name).append(1, '/').append(token);
  return out;
}

FeatureName FeatureName::parse(std::string_view rendered) {
  auto first = rendered.find('/');
  auto second = first == std::string_view::npos ? first : rendered.find('/', first + 1);
  if (second == std::string_view::npos)
    throw ParseError(0, "malformed feature name '" + std::string(rendered) + "'");
  auto scheme = parse_scheme(rendered.substr(first + 1, second - first - 1));
  if (!scheme) throw ParseError(0, "unknown scheme in '" + std::string(rendered) + "'");
  return FeatureName{std::string(rendered.substr(0, first)), *scheme,
                     std::string(rendered.substr(second + 1))};
}

namespace {

bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
    case 'A': case 'E': case 'I': case 'O': case 'U':
      return true;
    default:
      return false;
  }
}

char canonical_char(char c) {
  if (c >= '0' && c <= '9') return '0';
  if (c >= 'A' && c <= 'Z') return is_vowel(c) ? 'A' : 'B';
  if (c >= 'a' && c <= 'z') return is_vowel(c) ? 'a' : 'b';
  return c;
}

void append_name(std::vector<std::string>& out, const std::string& group, Scheme scheme,
                 std::string_view token) {
  auto scheme_name = to_string(scheme);
  std::string name;
  name.reserve(group.size() + scheme_name.size() + token.size() + 2);
  name.append(group).append(1, '/').append(scheme_name).append(1, '/').append(token);
  out.push_back(std::move(name));
}

Scheme ngram_scheme(int n) {
  switch (n) {
    case 1: return Scheme::ngram1;
    case 2: return Scheme::ngram2;
    case 3: return Scheme::ngram3;
  }
  throw ConfigError("n-gram order must be 1, 2 or 3 (got " + std::to_string(n) + ")");
}

void emit_group(std::vector<std::string>& out, const std::string& group,
                const GroupSpec& spec, const AttributeValue* value) {
  if (!value) {
    append_name(out, group, Scheme::null_marker, "");
    return;
  }
  if (kind_of(*value) != spec.kind)
    throw DataError("group '" + group + "' is declared " + std::string(to_string(spec.kind)) +
                    " but the event holds a " + std::string(to_string(kind_of(*value))) +
                    " value");
  switch (spec.kind) {
    case AttributeKind::categorical: {
      const auto& v = std::get<Categorical>(*value).value;
      if (v)
        append_name(out, group, Scheme::categorical, *v);
      else
        append_name(out, group, Scheme::null_marker, "");
      break;
    }
    case AttributeKind::ordinal:
      append_name(out, group, Scheme::ordinal_bin,
                  ordinal_bin(std::get<Ordinal>(*value).value, spec.ordinal_base));
      break;
    case AttributeKind::text: {
      const auto& s = std::get<Text>(*value).value;
      for (const auto& t : trigrams(s, false)) append_name(out, group, Scheme::trigram, t);
      if (spec.sorted_trigrams)
        for (const auto& t : trigrams(s, true))
          append_name(out, group, Scheme::sorted_trigram, t);
      break;
    }
    case AttributeKind::sequence: {
      const auto& tokens = std::get<Sequence>(*value).tokens;
      for (int n : spec.ngram_orders) {
        Scheme scheme = ngram_scheme(n);
        if (tokens.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
          std::string gram = tokens[i];
          for (int k = 1; k < n; ++k) gram.append(1, '|').append(tokens[i + k]);
          append_name(out, group, scheme, gram);
        }
      }
      break;
    }
  }
}

}  // namespace

std::string canonicalize(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = canonical_char(c);
  return out;
}

std::set<std::string> trigrams(std::string_view s, bool sorted) {
  std::string c = canonicalize(s);
  std::set<std::string> out;
  if (c.size() < 3) {
    out.insert(c);
    return out;
  }
  for (std::size_t i = 0; i + 3 <= c.size(); ++i) {
    std::string t = c.substr(i, 3);
    if (sorted) std::sort(t.begin(), t.end());
    out.insert(std::move(t));
  }
  return out;
}

std::string ordinal_bin(std::uint64_t v, std::uint64_t base) {
  if (base < 2) throw ConfigError("ordinal base must be at least 2");
  if (v == 0) return "zero";
  std::uint64_t power = 1;
  int i = 0;
  while (power <= v / base) {
    power *= base;
    ++i;
  }
  return std::to_string(i);
}

VectorizerSpec VectorizerSpec::from_header(const CorpusHeader& header,
                                           const VectorizerOptions& options) {
  auto require_kind = [&](const std::string& group, AttributeKind kind, const char* option) {
    auto it = header.groups.find(group);
    if (it == header.groups.end())
      throw ConfigError(std::string(option) + ": unknown group '" + group + "'");
    if (it->second != kind)
      throw ConfigError(std::string(option) + ": group '" + group + "' is " +
                        std::string(to_string(it->second)) + ", not " +
                        std::string(to_string(kind)));
  };
  auto check_orders = [](const std::vector<int>& orders, const std::string& what) {
    if (orders.empty()) throw ConfigError(what + ": at least one n-gram order required");
    for (int n : orders)
      if (n < 1 || n > 3) throw ConfigError(what + ": n-gram orders must be 1, 2 or 3");
  };
  if (options.ordinal_base < 2) throw ConfigError("ordinal_base must be at least 2");
  check_orders(options.ngram_orders, "ngrams");

  for (const auto& g : options.sorted_trigram_groups)
    require_kind(g, AttributeKind::text, "sorted_trigram_groups");
  for (const auto& [g, base] : options.ordinal_base_overrides) {
    require_kind(g, AttributeKind::ordinal, "ordinal_base");
    if (base < 2) throw ConfigError("ordinal_base." + g + " must be at least 2");
  }
  for (const auto& [g, orders] : options.ngram_overrides) {
    require_kind(g, AttributeKind::sequence, "ngrams");
    check_orders(orders, "ngrams." + g);
  }

  VectorizerSpec spec;
  for (const auto& [group, kind] : header.groups) {
    if (group.find('/') != std::string::npos)
      throw ConfigError("group name '" + group + "' contains '/'");
    GroupSpec g;
    g.kind = kind;
    g.ordinal_base = options.ordinal_base;
    if (auto it = options.ordinal_base_overrides.find(group);
        it != options.ordinal_base_overrides.end())
      g.ordinal_base = it->second;
    g.sorted_trigrams = options.sorted_trigram_groups.contains(group);
    g.ngram_orders = options.ngram_orders;
    if (auto it = options.ngram_overrides.find(group); it != options.ngram_overrides.end())
      g.ngram_orders = it->second;
    std::sort(g.ngram_orders.begin(), g.ngram_orders.end());
    g.ngram_orders.erase(std::unique(g.ngram_orders.begin(), g.ngram_orders.end()),
                         g.ngram_orders.end());
    spec.groups.emplace(group, std::move(g));
  }
  return spec;
}

std::vector<std::string> extract_rendered(const ScanEvent& event, const VectorizerSpec& spec) {
  for (const auto& [group, value] : event.attributes)
    if (!spec.groups.contains(group))
      throw DataError("event attribute group '" + group + "' is not in the vectorizer spec");

  std::vector<std::string> out;
  for (const auto& [group, gspec] : spec.groups) {
    auto it = event.attributes.find(group);
    emit_group(out, group, gspec, it == event.attributes.end() ? nullptr : &it->second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<FeatureName> extract_features(const ScanEvent& event, const VectorizerSpec& spec) {
  std::vector<FeatureName> out;
  for (const auto& r : extract_rendered(event, spec)) out.push_back(FeatureName::parse(r));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

FeatureDictionary::FeatureDictionary(std::vector<std::string> rendered_names)
    : names_(std::move(rendered_names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  index_.reserve(names_.size());
  std::uint64_t h = fnv1a64("");
  for (std::uint32_t i = 0; i < names_.size(); ++i) {
    index_.emplace(names_[i], i);
    h = fnv1a64(names_[i], h);
    h = fnv1a64("\n", h);
  }
  fingerprint_ = h;
}

std::optional<std::uint32_t> FeatureDictionary::index_of(std::string_view rendered) const {
  auto it = index_.find(std::string(rendered));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureDictionary build_dictionary(std::span<const ScanEvent> events,
                                   const VectorizerSpec& spec) {
  std::vector<std::string> names;
  for (const auto& e : events) {
    auto r = extract_rendered(e, spec);
    names.insert(names.end(), std::make_move_iterator(r.begin()),
                 std::make_move_iterator(r.end()));
  }
  return FeatureDictionary(std::move(names));
}

FeatureVector vectorize(const ScanEvent& event, const VectorizerSpec& spec,
                        const FeatureDictionary& dict) {
  FeatureVector v;
  v.dims = static_cast<std::uint32_t>(dict.size());
  for (const auto& name : extract_rendered(event, spec))
    if (auto idx = dict.index_of(name)) v.active.push_back(*idx);
  std::sort(v.active.begin(), v.active.end());
  return v;
}

FeatureCatalog::FeatureCatalog(const Corpus& corpus, const VectorizerSpec& spec) {
  std::unordered_map<std::string, std::uint32_t> provisional;
  std::vector<std::string> names;
  std::vector<std::uint32_t> ids;

  history_offset_.reserve(corpus.histories.size() + 1);
  event_offset_.reserve(corpus.event_count() + 1);
  for (const auto& h : corpus.histories) {
    history_offset_.push_back(event_offset_.size());
    for (const auto& e : h.events) {
      event_offset_.push_back(ids.size());
      for (auto& r : extract_rendered(e, spec)) {
        auto [it, inserted] =
            provisional.try_emplace(r, static_cast<std::uint32_t>(names.size()));
        if (inserted) names.push_back(std::move(r));
        ids.push_back(it->second);
      }
    }
  }
  history_offset_.push_back(event_offset_.size());
  event_offset_.push_back(ids.size());

  std::vector<std::uint32_t> order(names.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return names[a] < names[b]; });
  std::vector<std::uint32_t> rank(names.size());
  names_.reserve(names.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = r;
    names_.push_back(std::move(names[order[r]]));
  }
  for (auto& id : ids) id = rank[id];
  for (std::size_t e = 0; e + 1 < event_offset_.size(); ++e)
    std::sort(ids.begin() + event_offset_[e], ids.begin() + event_offset_[e + 1]);
  ids_ = std::move(ids);
}

std::span<const std::uint32_t> FeatureCatalog::features(std::size_t history,
                                                        std::size_t event) const {
  std::size_t slot = history_offset_[history] + event;
  return {ids_.data() + event_offset_[slot], event_offset_[slot + 1] - event_offset_[slot]};
}

FeatureDictionary FeatureCatalog::dictionary(std::span<const std::uint32_t> ids) const {
  std::vector<std::string> names;
  names.reserve(ids.size());
  for (auto id : ids) names.push_back(names_[id]);
  return FeatureDictionary(std::move(names));
}

}  // namespace mdetect
