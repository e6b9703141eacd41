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

#include "mdetect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "mdetect/errors.hpp"

namespace mdetect {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::ordinal: return "ordinal";
    case AttributeKind::text: return "text";
    case AttributeKind::sequence: return "sequence";
  }
  return "unknown";
}

std::optional<AttributeKind> parse_attribute_kind(std::string_view name) {
  if (name == "categorical") return AttributeKind::categorical;
  if (name == "ordinal") return AttributeKind::ordinal;
  if (name == "text") return AttributeKind::text;
  if (name == "sequence") return AttributeKind::sequence;
  return std::nullopt;
}

AttributeKind kind_of(const AttributeValue& value) {
  return static_cast<AttributeKind>(value.index());
}

std::string_view to_string(GoldLabel label) {
  return label == GoldLabel::malicious ? "malicious" : "benign";
}

std::string_view to_string(AsOfLabel label) {
  switch (label) {
    case AsOfLabel::benign: return "benign";
    case AsOfLabel::malicious: return "malicious";
    case AsOfLabel::unknown: return "unknown";
  }
  return "unknown";
}

int ScanEvent::detection_count() const {
  return static_cast<int>(std::count_if(vendor_verdicts.begin(), vendor_verdicts.end(),
                                        [](const auto& v) { return v.second; }));
}

std::size_t Corpus::event_count() const {
  std::size_t n = 0;
  for (const auto& h : histories) n += h.events.size();
  return n;
}

Timestamp Corpus::min_time() const {
  Timestamp t = std::numeric_limits<Timestamp>::max();
  for (const auto& h : histories)
    if (!h.events.empty()) t = std::min(t, h.events.front().time);
  return histories.empty() ? 0 : t;
}

Timestamp Corpus::max_time() const {
  Timestamp t = std::numeric_limits<Timestamp>::min();
  for (const auto& h : histories)
    if (!h.events.empty()) t = std::max(t, h.events.back().time);
  return histories.empty() ? 0 : t;
}

namespace {

bool is_header(const Json& j) { return j.is_object() && j.contains("groups"); }

CorpusHeader parse_header(const Json& j) {
  CorpusHeader header;
  if (!is_header(j) || !j["groups"].is_object())
    throw ParseError(1, "first line must be a header with a \"groups\" object");
  for (const auto& [name, kind] : j["groups"].items()) {
    if (!kind.is_string())
      throw ParseError(1, "group '" + name + "' kind must be a string");
    auto parsed = parse_attribute_kind(kind.get<std::string>());
    if (!parsed)
      throw ParseError(1, "group '" + name + "' has unknown kind '" +
                              kind.get<std::string>() + "'");
    header.groups.emplace(name, *parsed);
  }
  if (!j.contains("vendors") || !j["vendors"].is_array())
    throw ParseError(1, "header must list \"vendors\"");
  std::set<std::string> seen;
  for (const auto& v : j["vendors"]) {
    if (!v.is_string()) throw ParseError(1, "vendor names must be strings");
    auto name = v.get<std::string>();
    if (!seen.insert(name).second) throw ParseError(1, "duplicate vendor '" + name + "'");
    header.vendors.push_back(std::move(name));
  }
  if (header.vendors.empty()) throw ParseError(1, "header lists no vendors");
  return header;
}

AttributeValue parse_attribute(const std::string& group, AttributeKind kind,
                               const Json& v, std::size_t line) {
  auto mismatch = [&] {
    return ParseError(line, "group '" + group + "' is declared " +
                                std::string(to_string(kind)) +
                                " but holds an incompatible value");
  };
  switch (kind) {
    case AttributeKind::categorical:
      if (v.is_null()) return Categorical{};
      if (!v.is_string()) throw mismatch();
      return Categorical{v.get<std::string>()};
    case AttributeKind::ordinal:
      if (v.is_number_unsigned()) return Ordinal{v.get<std::uint64_t>()};
      if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0)
          throw ParseError(line, "negative ordinal in group '" + group + "'");
        return Ordinal{static_cast<std::uint64_t>(v.get<std::int64_t>())};
      }
      throw mismatch();
    case AttributeKind::text:
      if (!v.is_string()) throw mismatch();
      return Text{v.get<std::string>()};
    case AttributeKind::sequence: {
      if (!v.is_array()) throw mismatch();
      Sequence seq;
      seq.tokens.reserve(v.size());
      for (const auto& t : v) {
        if (!t.is_string()) throw mismatch();
        seq.tokens.push_back(t.get<std::string>());
      }
      return seq;
    }
  }
  throw mismatch();
}

ScanEvent event_from_json(const Json& j, const CorpusHeader& header,
                          const std::set<std::string_view>& vendors, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "scan event must be a JSON object");
  if (is_header(j)) throw ParseError(line, "duplicate header");

  ScanEvent event;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty())
    throw ParseError(line, "missing or empty \"id\"");
  event.binary_id = id->get<std::string>();

  auto time = j.find("time");
  if (time == j.end() || !time->is_number_integer())
    throw ParseError(line, "missing or non-integer \"time\"");
  if (time->is_number_unsigned()) {
    if (time->get<std::uint64_t>() >
        static_cast<std::uint64_t>(std::numeric_limits<Timestamp>::max()))
      throw ParseError(line, "\"time\" out of range");
    event.time = static_cast<Timestamp>(time->get<std::uint64_t>());
  } else {
    event.time = time->get<std::int64_t>();
  }
  if (event.time < 0) throw ParseError(line, "negative \"time\"");

  auto verdicts = j.find("verdicts");
  if (verdicts == j.end() || !verdicts->is_object() || verdicts->empty())
    throw ParseError(line, "missing or empty \"verdicts\"");
  for (const auto& [vendor, verdict] : verdicts->items()) {
    if (!vendors.contains(vendor)) throw ParseError(line, "unknown vendor '" + vendor + "'");
    if (!verdict.is_boolean())
      throw ParseError(line, "verdict of '" + vendor + "' must be a boolean");
    event.vendor_verdicts.emplace(vendor, verdict.get<bool>());
  }

  if (auto attrs = j.find("attrs"); attrs != j.end()) {
    if (!attrs->is_object()) throw ParseError(line, "\"attrs\" must be an object");
    for (const auto& [group, value] : attrs->items()) {
      auto kind = header.groups.find(group);
      if (kind == header.groups.end())
        throw ParseError(line, "undeclared group '" + group + "'");
      event.attributes.emplace(group, parse_attribute(group, kind->second, value, line));
    }
  }
  return event;
}

Json parse_json_line(std::string_view text, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
}

std::string_view trim_line(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

OrderedJson attribute_to_json(const AttributeValue& value) {
  return std::visit(
      [](const auto& v) -> OrderedJson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Categorical>) {
          return v.value ? OrderedJson(*v.value) : OrderedJson(nullptr);
        } else if constexpr (std::is_same_v<T, Ordinal>) {
          return OrderedJson(v.value);
        } else if constexpr (std::is_same_v<T, Text>) {
          return OrderedJson(v.value);
        } else {
          return OrderedJson(v.tokens);
        }
      },
      value);
}

}  // namespace

ScanEvent parse_event(std::string_view line, const CorpusHeader& header,
                      std::size_t line_number) {
  std::set<std::string_view> vendors(header.vendors.begin(), header.vendors.end());
  return event_from_json(parse_json_line(line, line_number), header, vendors, line_number);
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  std::set<std::string_view> vendors;
  std::unordered_map<std::string, std::size_t> slot;

  while (std::getline(in, raw)) {
    ++line;
    auto text = trim_line(raw);
    if (text.empty()) continue;
    Json j = parse_json_line(text, line);
    if (!have_header) {
      corpus.header = parse_header(j);
      vendors = {corpus.header.vendors.begin(), corpus.header.vendors.end()};
      have_header = true;
      continue;
    }
    ScanEvent event = event_from_json(j, corpus.header, vendors, line);
    auto [it, inserted] = slot.try_emplace(event.binary_id, corpus.histories.size());
    if (inserted) corpus.histories.push_back(BinaryHistory{event.binary_id, {}});
    corpus.histories[it->second].events.push_back(std::move(event));
  }
  if (!have_header) throw ParseError(line ? line : 1, "missing header");

  for (auto& h : corpus.histories)
    std::stable_sort(h.events.begin(), h.events.end(),
                     [](const ScanEvent& a, const ScanEvent& b) { return a.time < b.time; });
  return corpus;
}

Corpus parse_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path + "'");
  return parse_corpus(in);
}

std::string serialize_event(const ScanEvent& event) {
  OrderedJson j;
  j["id"] = event.binary_id;
  j["time"] = event.time;
  OrderedJson verdicts = OrderedJson::object();
  for (const auto& [vendor, detected] : event.vendor_verdicts) verdicts[vendor] = detected;
  j["verdicts"] = std::move(verdicts);
  OrderedJson attrs = OrderedJson::object();
  for (const auto& [group, value] : event.attributes) attrs[group] = attribute_to_json(value);
  j["attrs"] = std::move(attrs);
  return j.dump();
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  OrderedJson header;
  OrderedJson groups = OrderedJson::object();
  for (const auto& [name, kind] : corpus.header.groups) groups[name] = to_string(kind);
  header["groups"] = std::move(groups);
  header["vendors"] = corpus.header.vendors;
  out << header.dump() << '\n';

  std::vector<std::tuple<Timestamp, std::size_t, std::size_t>> order;
  order.reserve(corpus.event_count());
  for (std::size_t h = 0; h < corpus.histories.size(); ++h)
    for (std::size_t e = 0; e < corpus.histories[h].events.size(); ++e)
      order.emplace_back(corpus.histories[h].events[e].time, h, e);
  std::sort(order.begin(), order.end());
  for (const auto& [time, h, e] : order)
    out << serialize_event(corpus.histories[h].events[e]) << '\n';
}

GoldLabel gold_label(const BinaryHistory& history, int gold_threshold) {
  if (history.events.empty())
    throw DataError("gold_label: empty history for '" + history.binary_id + "'");
  return history.last().detection_count() >= gold_threshold ? GoldLabel::malicious
                                                             : GoldLabel::benign;
}

const ScanEvent* latest_event_at(const BinaryHistory& history, Timestamp t) {
  auto it = std::upper_bound(history.events.begin(), history.events.end(), t,
                             [](Timestamp v, const ScanEvent& e) { return v < e.time; });
  if (it == history.events.begin()) return nullptr;
  return &*std::prev(it);
}

AsOfLabel label_as_of(const BinaryHistory& history, Timestamp t, int gold_threshold) {
  const ScanEvent* e = latest_event_at(history, t);
  if (!e) return AsOfLabel::unknown;
  return e->detection_count() >= gold_threshold ? AsOfLabel::malicious : AsOfLabel::benign;
}

}  // namespace mdetect
