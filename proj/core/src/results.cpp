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

#include "mdetect/results.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "mdetect/errors.hpp"

namespace mdetect {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename '" + tmp.string() + "': " + ec.message());
}

fs::path model_path(const fs::path& dir, int period) {
  return dir / ("model_" + std::to_string(period) + ".bin");
}

fs::path dictionary_path(const fs::path& dir, int period) {
  return dir / ("dict_" + std::to_string(period) + ".txt");
}

namespace {

// Feature tokens may hold any byte; one name per line needs \n escaped.
std::string escape_line(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\n') out += "\\n";
    else if (c == '\r') out += "\\r";
    else out += c;
  }
  return out;
}

std::string unescape_line(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    char next = s[++i];
    out += next == 'n' ? '\n' : next == 'r' ? '\r' : next;
  }
  return out;
}

}  // namespace

void write_results(const fs::path& dir, const ExperimentResult& result) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());

  std::ostringstream periods;
  periods << "period,query_count,n_eval\n";
  for (const auto& p : result.periods)
    periods << p.period_index << ',' << p.query_count << ',' << p.evaluations.size() << '\n';
  write_file_atomic(dir / "periods.csv", periods.str());

  std::ostringstream scores;
  scores << "binary_id,time,period,score,gold,first_appearance,vendor_detected_at_first\n";
  for (const auto& p : result.periods)
    for (const auto& e : p.evaluations)
      scores << e.binary_id << ',' << e.time << ',' << p.period_index << ','
             << format_double(e.score) << ',' << to_string(e.gold) << ','
             << (e.first_appearance ? 1 : 0) << ',' << (e.vendor_detected_at_first ? 1 : 0)
             << '\n';
  write_file_atomic(dir / "scores.csv", scores.str());

  std::ostringstream roc_out;
  write_roc_csv(aggregate_roc(result.periods), roc_out);
  write_file_atomic(dir / "roc.csv", roc_out.str());

  std::ostringstream log;
  result.review_log.write_csv(log);
  write_file_atomic(dir / "review_log.csv", log.str());

  for (const auto& a : result.artifacts) {
    std::ostringstream model;
    write_model(a.model, model);
    write_file_atomic(model_path(dir, a.period_index), model.str());
    std::ostringstream names;
    for (const auto& n : a.dictionary.names()) names << escape_line(n) << '\n';
    write_file_atomic(dictionary_path(dir, a.period_index), names.str());
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T field_as(const std::string& s, const fs::path& file, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(file.string() + ":" + std::to_string(line) + ": bad value '" + s + "'");
  return v;
}

std::ifstream open_csv(const fs::path& file, std::string_view expected_header) {
  std::ifstream in(file);
  if (!in) throw DataError("missing results file '" + file.string() + "'");
  std::string header;
  std::getline(in, header);
  if (header != expected_header)
    throw DataError("unexpected header in '" + file.string() + "'");
  return in;
}

}  // namespace

std::vector<PeriodResult> read_scores(const fs::path& dir) {
  const fs::path file = dir / "scores.csv";
  auto in = open_csv(file,
                     "binary_id,time,period,score,gold,first_appearance,vendor_detected_at_first");
  std::vector<PeriodResult> out;
  std::map<int, std::size_t> slot;
  std::string line;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 7)
      throw DataError(file.string() + ":" + std::to_string(n) + ": expected 7 fields");
    Evaluation e;
    e.binary_id = f[0];
    e.time = field_as<Timestamp>(f[1], file, n);
    const int period = field_as<int>(f[2], file, n);
    if (f[3] == "inf" || f[3] == "-inf" || f[3] == "nan")
      throw DataError(file.string() + ":" + std::to_string(n) + ": non-finite score");
    e.score = field_as<double>(f[3], file, n);
    if (f[4] != "malicious" && f[4] != "benign")
      throw DataError(file.string() + ":" + std::to_string(n) + ": bad gold label");
    e.gold = f[4] == "malicious" ? GoldLabel::malicious : GoldLabel::benign;
    e.first_appearance = f[5] == "1";
    e.vendor_detected_at_first = f[6] == "1";
    auto [it, inserted] = slot.try_emplace(period, out.size());
    if (inserted) {
      out.emplace_back();
      out.back().period_index = period;
    }
    out[it->second].evaluations.push_back(std::move(e));
  }
  return out;
}

std::vector<PeriodSummary> read_periods(const fs::path& dir) {
  const fs::path file = dir / "periods.csv";
  auto in = open_csv(file, "period,query_count,n_eval");
  std::vector<PeriodSummary> out;
  std::string line;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3)
      throw DataError(file.string() + ":" + std::to_string(n) + ": expected 3 fields");
    out.push_back({field_as<int>(f[0], file, n), field_as<int>(f[1], file, n),
                   field_as<std::size_t>(f[2], file, n)});
  }
  return out;
}

FeatureDictionary read_dictionary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing dictionary '" + path.string() + "'");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) names.push_back(unescape_line(line));
  return FeatureDictionary(std::move(names));
}

Model read_model_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing model '" + path.string() + "'");
  return read_model(in);
}

}  // namespace mdetect
