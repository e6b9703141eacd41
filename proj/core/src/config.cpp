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

#include "mdetect/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "mdetect/errors.hpp"
#include "mdetect/format.hpp"

namespace mdetect {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(std::string(key) + ": invalid number '" + std::string(value) + "'");
  return out;
}

int parse_int(std::string_view key, std::string_view value) {
  return parse_number<int>(key, value);
}

double parse_real(std::string_view key, std::string_view value) {
  return parse_number<double>(key, value);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  while (!value.empty()) {
    auto comma = value.find(',');
    auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<int> parse_orders(std::string_view key, std::string_view value) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError(std::string(key) + ": empty list");
  return out;
}

std::string join_orders(const std::vector<int>& orders) {
  std::string s;
  for (std::size_t i = 0; i < orders.size(); ++i) s += (i ? "," : "") + std::to_string(orders[i]);
  return s;
}

void apply(ExperimentConfig& c, std::string_view key, std::string_view value) {
  if (key == "period_days") {
    c.period_days = parse_int(key, value);
  } else if (key == "regime") {
    auto r = parse_regime(value);
    if (!r) throw ConfigError("regime: unknown value '" + std::string(value) + "'");
    c.regime = *r;
  } else if (key == "release_delay_days") {
    c.release_delay_days = parse_int(key, value);
  } else if (key == "folds") {
    c.folds = parse_int(key, value);
  } else if (key == "strategy") {
    auto s = parse_query_strategy(value);
    if (!s) throw ConfigError("strategy: unknown value '" + std::string(value) + "'");
    c.policy.strategy = *s;
  } else if (key == "budget_per_day") {
    c.policy.budget_per_day = parse_real(key, value);
  } else if (key == "auto_relabel_threshold") {
    c.policy.auto_relabel_threshold = parse_real(key, value);
  } else if (key == "consensus_threshold") {
    c.policy.consensus_threshold = parse_int(key, value);
  } else if (key == "reviewer_tpr") {
    c.profile.tpr = parse_real(key, value);
  } else if (key == "reviewer_fpr") {
    c.profile.fpr = parse_real(key, value);
  } else if (key == "reviewer_seed") {
    c.profile.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "c_neg") {
    c.hyper.c_neg = parse_real(key, value);
  } else if (key == "c_pos") {
    c.hyper.c_pos = parse_real(key, value);
  } else if (key == "w_review") {
    c.hyper.w_review = parse_real(key, value);
  } else if (key == "convergence_tol") {
    c.hyper.convergence_tol = parse_real(key, value);
  } else if (key == "max_iters") {
    c.hyper.max_iters = parse_int(key, value);
  } else if (key == "gold_threshold") {
    c.gold_threshold = parse_int(key, value);
  } else if (key == "bootstrap_periods") {
    c.bootstrap_periods = parse_int(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "ordinal_base") {
    c.vectorizer.ordinal_base = parse_number<std::uint64_t>(key, value);
  } else if (key == "ngrams") {
    c.vectorizer.ngram_orders = parse_orders(key, value);
  } else if (key == "sorted_trigram_groups") {
    auto groups = split_list(value);
    c.vectorizer.sorted_trigram_groups = {groups.begin(), groups.end()};
  } else if (key.starts_with("ordinal_base.")) {
    c.vectorizer.ordinal_base_overrides[std::string(key.substr(13))] =
        parse_number<std::uint64_t>(key, value);
  } else if (key.starts_with("ngrams.")) {
    c.vectorizer.ngram_overrides[std::string(key.substr(7))] = parse_orders(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line) + ": expected 'key = value'");
    auto key = trim(text.substr(0, eq));
    auto value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty key");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError("duplicate config key '" + std::string(key) + "'");
    apply(config, key, value);
  }
  config.validate();
  return config;
}

ExperimentConfig parse_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_experiment_config(in);
}

std::string render_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "period_days = " << c.period_days << '\n'
      << "regime = " << to_string(c.regime) << '\n';
  if (c.release_delay_days) out << "release_delay_days = " << *c.release_delay_days << '\n';
  if (c.folds) out << "folds = " << *c.folds << '\n';
  out << "strategy = " << to_string(c.policy.strategy) << '\n'
      << "budget_per_day = " << format_double(c.policy.budget_per_day) << '\n'
      << "auto_relabel_threshold = " << format_double(c.policy.auto_relabel_threshold) << '\n'
      << "consensus_threshold = " << c.policy.consensus_threshold << '\n'
      << "reviewer_tpr = " << format_double(c.profile.tpr) << '\n'
      << "reviewer_fpr = " << format_double(c.profile.fpr) << '\n'
      << "reviewer_seed = " << c.profile.seed << '\n'
      << "c_neg = " << format_double(c.hyper.c_neg) << '\n'
      << "c_pos = " << format_double(c.hyper.c_pos) << '\n'
      << "w_review = " << format_double(c.hyper.w_review) << '\n';
  if (c.hyper.convergence_tol)
    out << "convergence_tol = " << format_double(*c.hyper.convergence_tol) << '\n';
  out << "max_iters = " << c.hyper.max_iters << '\n'
      << "gold_threshold = " << c.gold_threshold << '\n'
      << "bootstrap_periods = " << c.bootstrap_periods << '\n'
      << "seed = " << c.seed << '\n'
      << "ordinal_base = " << c.vectorizer.ordinal_base << '\n'
      << "ngrams = " << join_orders(c.vectorizer.ngram_orders) << '\n';
  if (!c.vectorizer.sorted_trigram_groups.empty()) {
    out << "sorted_trigram_groups = ";
    bool first = true;
    for (const auto& g : c.vectorizer.sorted_trigram_groups) {
      out << (first ? "" : ",") << g;
      first = false;
    }
    out << '\n';
  }
  for (const auto& [g, base] : c.vectorizer.ordinal_base_overrides)
    out << "ordinal_base." << g << " = " << base << '\n';
  for (const auto& [g, orders] : c.vectorizer.ngram_overrides)
    out << "ngrams." << g << " = " << join_orders(orders) << '\n';
  return out.str();
}

}  // namespace mdetect
