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

// Plain-text experiment configuration: `key = value` lines, `#` comments.

#include <iosfwd>
#include <string>

#include "mdetect/harness.hpp"

namespace mdetect {

/// Parses a config. Unknown keys, malformed values and regime-specific keys
/// given for the wrong regime raise ConfigError naming the key.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config_file(const std::string& path);

/// Renders every field, one key per line; parses back to the same config.
std::string render_experiment_config(const ExperimentConfig& config);

}  // namespace mdetect
