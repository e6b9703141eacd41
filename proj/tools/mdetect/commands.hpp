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

// Subcommands of the mdetect tool. Each returns a process exit code:
// 0 success, 1 usage or configuration error, 2 data error.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mdetect/synth.hpp"

namespace mdetect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kToolVersion = "0.1.0";

struct SynthArgs {
  SynthConfig config;
  std::string out;
  bool quiet = false;
};

struct RunArgs {
  std::string corpus;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

struct ReportArgs {
  std::string results;
  std::vector<double> fprs{0.001, 0.005, 0.01};
  std::optional<std::string> csv;
};

struct ImportanceArgs {
  std::string results;
  int period = 0;
  std::optional<std::string> out;
};

struct VectorizeArgs {
  std::string corpus;
  /// 1-based line number in the corpus file; line 1 is the header.
  std::size_t line = 2;
  std::optional<std::string> config;
};

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);
int cmd_importance(const ImportanceArgs& args, std::ostream& out, std::ostream& err);
int cmd_vectorize(const VectorizeArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdetect::cli
