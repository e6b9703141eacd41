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

#include <gtest/gtest.h>

#include <sstream>

#include "mdetect/corpus.hpp"
#include "mdetect/errors.hpp"
#include "support.hpp"

namespace mdetect {
namespace {

using testing::make_event;
using testing::make_history;
using testing::tiny_header;

const char* kHeader =
    R"({"groups": {"api": "sequence", "name": "text", "signer": "categorical", "size": "ordinal"}, "vendors": ["a", "b", "c", "d", "e"]})";

std::string event_line(const std::string& id, long time, int detections,
                       const std::string& attrs = "{}") {
  std::string verdicts;
  const char* names[] = {"a", "b", "c", "d", "e"};
  for (int v = 0; v < 5; ++v) {
    if (v) verdicts += ", ";
    verdicts += std::string("\"") + names[v] + "\": " + (v < detections ? "true" : "false");
  }
  return "{\"id\": \"" + id + "\", \"time\": " + std::to_string(time) + ", \"verdicts\": {" +
         verdicts + "}, \"attrs\": " + attrs + "}";
}

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

template <class Fn>
std::string parse_error_of(Fn&& fn, std::size_t* line = nullptr) {
  try {
    fn();
  } catch (const ParseError& e) {
    if (line) *line = e.line();
    return e.what();
  }
  return "";
}

TEST(ParseCorpus, EmptyBodyHasNoHistories) {
  Corpus c = parse(std::string(kHeader) + "\n");
  EXPECT_TRUE(c.histories.empty());
  EXPECT_EQ(c.header.vendors.size(), 5u);
  EXPECT_EQ(c.header.groups.at("size"), AttributeKind::ordinal);
}

TEST(ParseCorpus, OrdersEventsOfOneBinaryByTime) {
  Corpus c = parse(std::string(kHeader) + "\n" + event_line("ab", 5, 1) + "\n" +
                   event_line("ab", 3, 0) + "\n");
  ASSERT_EQ(c.histories.size(), 1u);
  ASSERT_EQ(c.histories[0].events.size(), 2u);
  EXPECT_EQ(c.histories[0].events[0].time, 3);
  EXPECT_EQ(c.histories[0].events[1].time, 5);
}

TEST(ParseCorpus, EqualTimesKeepInputOrder) {
  Corpus c = parse(std::string(kHeader) + "\n" + event_line("ab", 7, 2) + "\n" +
                   event_line("ab", 7, 0) + "\n");
  EXPECT_EQ(c.histories[0].events[0].detection_count(), 2);
  EXPECT_EQ(c.histories[0].events[1].detection_count(), 0);
}

TEST(ParseCorpus, PreservesEventCount) {
  std::string text = std::string(kHeader) + "\n";
  for (int i = 0; i < 40; ++i) text += event_line("id" + std::to_string(i % 7), i, i % 5) + "\n";
  Corpus c = parse(text);
  EXPECT_EQ(c.event_count(), 40u);
  EXPECT_EQ(c.histories.size(), 7u);
}

TEST(ParseCorpus, ParsesEveryAttributeKind) {
  Corpus c = parse(std::string(kHeader) + "\n" +
                   event_line("ff", 1, 0,
                              R"({"api": ["x", "y"], "name": "3PUe5f", "signer": null, "size": 12})") +
                   "\n");
  const auto& attrs = c.histories[0].events[0].attributes;
  EXPECT_EQ(std::get<Sequence>(attrs.at("api")).tokens, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(std::get<Text>(attrs.at("name")).value, "3PUe5f");
  EXPECT_FALSE(std::get<Categorical>(attrs.at("signer")).value.has_value());
  EXPECT_EQ(std::get<Ordinal>(attrs.at("size")).value, 12u);
}

TEST(ParseCorpus, NegativeOrdinalIsRejected) {
  std::size_t line = 0;
  auto what = parse_error_of(
      [] { parse(std::string(kHeader) + "\n" + event_line("ff", 1, 0, R"({"size": -1})") + "\n"); },
      &line);
  EXPECT_NE(what.find("negative ordinal"), std::string::npos) << what;
  EXPECT_EQ(line, 2u);
}

TEST(ParseCorpus, MalformedLineCarriesLineNumber) {
  std::size_t line = 0;
  auto what = parse_error_of(
      [] { parse(std::string(kHeader) + "\n" + event_line("a1", 1, 0) + "\n{not json\n"); },
      &line);
  EXPECT_EQ(line, 3u);
  EXPECT_NE(what.find("line 3"), std::string::npos) << what;
}

TEST(ParseCorpus, KindMismatchNamesTheGroup) {
  auto what = parse_error_of(
      [] { parse(std::string(kHeader) + "\n" + event_line("ff", 1, 0, R"({"size": "big"})") + "\n"); });
  EXPECT_NE(what.find("size"), std::string::npos) << what;
}

TEST(ParseCorpus, DuplicateHeaderIsRejected) {
  auto what = parse_error_of([] { parse(std::string(kHeader) + "\n" + kHeader + "\n"); });
  EXPECT_NE(what.find("duplicate header"), std::string::npos) << what;
}

TEST(ParseCorpus, UnknownVendorIsRejected) {
  std::string line = event_line("ff", 1, 0);
  line.replace(line.find("\"a\""), 3, "\"zz\"");
  auto what = parse_error_of([&] { parse(std::string(kHeader) + "\n" + line + "\n"); });
  EXPECT_NE(what.find("unknown vendor"), std::string::npos) << what;
}

TEST(ParseCorpus, MissingGroupMeansAbsent) {
  Corpus c = parse(std::string(kHeader) + "\n" + event_line("ff", 1, 0, R"({"size": 3})") + "\n");
  EXPECT_EQ(c.histories[0].events[0].attributes.count("signer"), 0u);
}

TEST(GoldLabel, ThresholdOnLastEvent) {
  auto h = tiny_header();
  EXPECT_EQ(gold_label(make_history({make_event(h, "x", 1, 0), make_event(h, "x", 2, 4)}), 4),
            GoldLabel::malicious);
  EXPECT_EQ(gold_label(make_history({make_event(h, "x", 1, 5), make_event(h, "x", 2, 3)}), 4),
            GoldLabel::benign);
  EXPECT_EQ(gold_label(make_history({make_event(h, "x", 1, 0)}), 4), GoldLabel::benign);
}

TEST(GoldLabel, FourOfThirtyTwoIsMalicious) {
  CorpusHeader h;
  for (int v = 0; v < 32; ++v) h.vendors.push_back("v" + std::to_string(v));
  EXPECT_EQ(gold_label(make_history({make_event(h, "x", 1, 4)})), GoldLabel::malicious);
}

TEST(GoldLabel, EmptyHistoryThrows) {
  BinaryHistory empty;
  EXPECT_THROW(gold_label(empty), DataError);
}

TEST(GoldLabel, MonotoneInThreshold) {
  auto h = tiny_header();
  for (int det = 0; det <= 6; ++det) {
    auto hist = make_history({make_event(h, "x", 1, det)});
    for (int t = 1; t < 7; ++t)
      if (gold_label(hist, t) == GoldLabel::benign)
        EXPECT_EQ(gold_label(hist, t + 1), GoldLabel::benign);
  }
}

TEST(LabelAsOf, LatestScanRule) {
  auto h = tiny_header();
  auto hist = make_history({make_event(h, "x", 10, 2), make_event(h, "x", 50, 6)});
  EXPECT_EQ(label_as_of(hist, 30, 4), AsOfLabel::benign);
  EXPECT_EQ(label_as_of(hist, 60, 4), AsOfLabel::malicious);
  EXPECT_EQ(label_as_of(hist, 5, 4), AsOfLabel::unknown);
  EXPECT_EQ(label_as_of(hist, 50, 4), AsOfLabel::malicious);
  EXPECT_EQ(label_as_of(hist, 49, 4), AsOfLabel::benign);
}

TEST(LabelAsOf, AfterLastEventMatchesGold) {
  auto h = tiny_header();
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b) {
      auto hist = make_history({make_event(h, "x", 1, a), make_event(h, "x", 9, b)});
      const auto gold = gold_label(hist, 3);
      EXPECT_EQ(label_as_of(hist, 9, 3) == AsOfLabel::malicious, gold == GoldLabel::malicious);
      EXPECT_NE(label_as_of(hist, 100, 3), AsOfLabel::unknown);
    }
}

TEST(SerializeCorpus, RoundTrip) {
  auto h = tiny_header();
  Corpus c;
  c.header = h;
  c.histories.push_back(make_history(
      {make_event(h, "aa", 1, 0,
                  {{"api", Sequence{{"Open", "Read"}}},
                   {"name", Text{"setup\n\"x\""}},
                   {"signer", Categorical{std::nullopt}},
                   {"size", Ordinal{77}}}),
       make_event(h, "aa", 9, 5, {{"signer", Categorical{"Acme"}}})}));
  c.histories.push_back(make_history({make_event(h, "bb", 3, 2, {{"size", Ordinal{0}}})}));
  std::ostringstream out;
  serialize_corpus(c, out);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_corpus(in), c);
}

TEST(SerializeEvent, SingleLine) {
  auto h = tiny_header();
  auto line = serialize_event(make_event(h, "aa", 1, 2, {{"name", Text{"a\nb"}}}));
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_event(line, h), make_event(h, "aa", 1, 2, {{"name", Text{"a\nb"}}}));
}

}  // namespace
}  // namespace mdetect
