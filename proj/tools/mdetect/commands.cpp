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

#include "mdetect/commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdetect/config.hpp"
#include "mdetect/errors.hpp"
#include "mdetect/harness.hpp"
#include "mdetect/results.hpp"

namespace mdetect::cli {

namespace fs = std::filesystem;

namespace {

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

}  // namespace

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.out.empty()) throw ConfigError("--out is required");
    Corpus corpus = synth_corpus(args.config);
    std::ostringstream text;
    serialize_corpus(corpus, text);
    write_file_atomic(args.out, text.str());
    if (!args.quiet) {
      std::size_t malicious = 0;
      for (const auto& h : corpus.histories) malicious += gold_label(h) == GoldLabel::malicious;
      out << "wrote " << args.out << ": " << corpus.histories.size() << " binaries, "
          << corpus.event_count() << " events, " << malicious << " malicious (gold)\n";
    }
    return kExitOk;
  });
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.out.empty()) throw ConfigError("--out is required");
    ExperimentConfig config;
    std::string config_bytes;
    if (args.config) {
      config_bytes = read_bytes(*args.config);
      std::istringstream in(config_bytes);
      config = parse_experiment_config(in);
    }
    if (args.seed) config.seed = *args.seed;
    config.validate();

    const std::string corpus_bytes = read_bytes(args.corpus);
    std::istringstream corpus_in(corpus_bytes);
    Corpus corpus = parse_corpus(corpus_in);

    const fs::path dir = args.out;
    fs::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a64(render_experiment_config(config)));
    manifest["corpus_hash"] = "fnv1a64:" + hex64(fnv1a64(corpus_bytes));
    manifest["corpus_path"] = fs::absolute(args.corpus).string();
    manifest["config_path"] = args.config ? fs::absolute(*args.config).string() : "";
    manifest["started_at"] = utc_now();
    manifest["finished_at"] = nullptr;
    manifest["output_dir"] = fs::absolute(dir).string();
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    write_file_atomic(dir / "config.txt", render_experiment_config(config));

    ExperimentResult result = run_experiment(corpus, config, {.keep_artifacts = true});
    write_results(dir, result);

    manifest["finished_at"] = utc_now();
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    if (!args.quiet) {
      int queries = 0;
      std::size_t evaluated = 0;
      for (const auto& p : result.periods) {
        queries += p.query_count;
        evaluated += p.evaluations.size();
      }
      RocCurve curve = aggregate_roc(result.periods);
      out << "regime " << to_string(config.regime) << ": " << result.periods.size()
          << " period(s), " << evaluated << " evaluated events, " << queries
          << " reviewer queries\n"
          << "detection at 1% fpr: " << fixed3(detection_at_fpr(curve, 0.01)) << '\n';
    }
    return kExitOk;
  });
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.fprs.empty()) throw ConfigError("at least one --fpr is required");
    for (double f : args.fprs)
      if (!(f >= 0 && f <= 1)) throw ConfigError("--fpr values must be in [0, 1]");
    std::vector<double> targets = args.fprs;
    std::sort(targets.begin(), targets.end());

    auto results = read_scores(args.results);
    auto periods = read_periods(args.results);
    RocCurve curve = aggregate_roc(results);
    auto novel = novel_sample_metrics(results, targets);

    std::ostringstream csv;
    csv << "target_fpr,detection,threshold,novel_detection,benign_fp,novel_count,benign_count\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : ""; };
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double detection = detection_at_fpr(curve, targets[i]);
      const auto& m = novel[i];
      out << "fpr " << format_double(targets[i]) << ": detection " << fixed3(detection)
          << ", novel detection "
          << (m.novel_detection_rate ? fixed3(*m.novel_detection_rate) : "absent")
          << " (" << m.novel_count << "), initially-undetected benign flagged "
          << (m.benign_false_positive_rate ? fixed3(*m.benign_false_positive_rate) : "absent")
          << " (" << m.benign_count << ")\n";
      csv << format_double(targets[i]) << ',' << format_double(detection) << ','
          << format_double(m.threshold) << ',' << opt(m.novel_detection_rate) << ','
          << opt(m.benign_false_positive_rate) << ',' << m.novel_count << ','
          << m.benign_count << '\n';
    }
    int queries = 0;
    for (const auto& p : periods) queries += p.query_count;
    out << "reviewer queries: " << queries << " over " << periods.size() << " period(s)\n";
    if (args.csv) write_file_atomic(*args.csv, csv.str());
    return kExitOk;
  });
}

int cmd_importance(const ImportanceArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const fs::path dir = args.results;
    auto manifest = nlohmann::json::parse(read_bytes(dir / "manifest.json"));
    const std::string corpus_path = manifest.at("corpus_path").get<std::string>();
    ExperimentConfig config = parse_experiment_config_file((dir / "config.txt").string());

    Model model = read_model_file(model_path(dir, args.period));
    FeatureDictionary dict = read_dictionary(dictionary_path(dir, args.period));
    if (model.w.size() != dict.size())
      throw DataError("model and dictionary of period " + std::to_string(args.period) +
                      " disagree on dimension");

    Corpus corpus = parse_corpus_file(corpus_path);
    VectorizerSpec spec = VectorizerSpec::from_header(corpus.header, config.vectorizer);
    std::map<std::pair<std::string, Timestamp>, const ScanEvent*> events;
    for (const auto& h : corpus.histories)
      for (const auto& e : h.events) events.emplace(std::pair{e.binary_id, e.time}, &e);

    std::vector<FeatureVector> instances;
    for (const auto& p : read_scores(dir)) {
      if (p.period_index != args.period) continue;
      for (const auto& ev : p.evaluations) {
        auto it = events.find({ev.binary_id, ev.time});
        if (it == events.end())
          throw DataError("scores.csv event " + ev.binary_id + "@" + std::to_string(ev.time) +
                          " is not in the corpus");
        instances.push_back(vectorize(*it->second, spec, dict));
      }
    }
    if (instances.empty())
      throw DataError("no evaluated events for period " + std::to_string(args.period));

    auto ranked = importance(model.w, instances, feature_groups(dict));
    std::ostringstream csv;
    csv << "group,importance\n";
    for (const auto& g : ranked) csv << g.group << ',' << format_double(g.importance) << '\n';
    if (args.out)
      write_file_atomic(*args.out, csv.str());
    else
      out << csv.str();
    return kExitOk;
  });
}

int cmd_vectorize(const VectorizeArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.line < 2) throw ConfigError("--line must point at an event (line 2 or later)");
    std::ifstream in(args.corpus);
    if (!in) throw DataError("cannot open corpus '" + args.corpus + "'");
    std::string header_line, line;
    std::getline(in, header_line);
    std::istringstream header_in(header_line);
    CorpusHeader header = parse_corpus(header_in).header;
    for (std::size_t n = 2; n <= args.line; ++n)
      if (!std::getline(in, line))
        throw DataError("corpus has no line " + std::to_string(args.line));
    ScanEvent event = parse_event(line, header, args.line);

    VectorizerOptions options;
    if (args.config) options = parse_experiment_config_file(*args.config).vectorizer;
    VectorizerSpec spec = VectorizerSpec::from_header(header, options);
    for (const auto& name : extract_rendered(event, spec)) out << name << '\n';
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reviewer-integrated malware detection experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<std::string> config_path;
  bool quiet = false;
  app.add_option("--seed", seed, "Seed for generation or experiment randomness");
  app.add_option("--out", out_path, "Output file or directory");
  app.add_option("--config", config_path, "Experiment config file (key = value)");
  app.add_flag("--quiet", quiet, "Suppress summaries");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic drifting corpus");
  synth_cmd->add_option("--binaries", synth.config.n_binaries)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--weeks", synth.config.n_weeks)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--malicious-fraction", synth.config.malicious_fraction)
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--families", synth.config.n_families)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--drift-rate", synth.config.drift_rate)->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--vendor-lag-weeks", synth.config.vendor_lag_weeks)
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--vendors", synth.config.n_vendors)->check(CLI::PositiveNumber);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a rolling-window experiment");
  run_cmd->add_option("--corpus", run.corpus, "Corpus file")->required();

  ReportArgs report;
  bool fprs_given = false;
  std::vector<double> fprs;
  auto* report_cmd = app.add_subcommand("report", "Summarize a results directory");
  report_cmd->add_option("--results", report.results, "Results directory")->required();
  report_cmd->add_option("--fpr", fprs, "Target false positive rates")->delimiter(',');
  report_cmd->add_option("--csv", report.csv, "Also write the report as CSV");

  ImportanceArgs imp;
  auto* imp_cmd = app.add_subcommand("importance", "Rank feature groups of one period's model");
  imp_cmd->add_option("--results", imp.results, "Results directory")->required();
  imp_cmd->add_option("--period", imp.period, "Period index")->required();

  VectorizeArgs vec;
  auto* vec_cmd = app.add_subcommand("vectorize", "Print the features of one corpus line");
  vec_cmd->add_option("--corpus", vec.corpus, "Corpus file")->required();
  vec_cmd->add_option("--line", vec.line, "1-based corpus line (header is line 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }
  fprs_given = !fprs.empty();

  if (synth_cmd->parsed()) {
    if (seed) synth.config.seed = *seed;
    synth.out = out_path;
    synth.quiet = quiet;
    if (synth.out.empty()) {
      err << "usage error: synth requires --out\n";
      return kExitUsage;
    }
    return cmd_synth(synth, out, err);
  }
  if (run_cmd->parsed()) {
    run.config = config_path;
    run.seed = seed;
    run.out = out_path;
    run.quiet = quiet;
    if (run.out.empty()) {
      err << "usage error: run requires --out\n";
      return kExitUsage;
    }
    return cmd_run(run, out, err);
  }
  if (report_cmd->parsed()) {
    if (fprs_given) report.fprs = fprs;
    if (!report.csv && !out_path.empty()) report.csv = out_path;
    return cmd_report(report, out, err);
  }
  if (imp_cmd->parsed()) {
    if (!out_path.empty()) imp.out = out_path;
    return cmd_importance(imp, out, err);
  }
  vec.config = config_path;
  return cmd_vectorize(vec, out, err);
}

}  // namespace mdetect::cli
