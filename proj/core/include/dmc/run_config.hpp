// Copyright 2026 The DMC Authors
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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmc/eval.hpp"
#include "dmc/model.hpp"
#include "dmc/synth.hpp"
#include "dmc/train.hpp"

namespace dmc {

/// Every tunable of the toolkit. Files hold `key = value` lines; `#` starts a
/// comment. Unknown keys are rejected with ConfigError naming the key.
struct RunConfig {
  GeneratorConfig generator;
  ModelConfig model;
  TrainConfig train;

  std::size_t scene_count = 2000;  ///< scenes written by `synth`
  std::uint64_t seed = 1;          ///< scene base seed and model/training seed
  double threshold = eval::kDefaultThreshold;
  double auc_step = eval::kDefaultAucStep;

  double gradcheck_step = 1e-5;
  std::size_t gradcheck_coords = 200;
  std::size_t gradcheck_batch = 2;
  std::size_t gradcheck_attempts = 10;
  double gradcheck_tolerance = 1e-4;
  double gradcheck_kink_guard = 1e-6;

  /// Desk-scale defaults.
  static RunConfig defaults();

  /// Applies one `key = value` assignment.
  void set(const std::string& key, const std::string& value);

  void validate() const;

  static std::vector<std::string> keys();
};

RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes every key with its current value, parseable by parse_run_config.
void write_run_config(std::ostream& os, const RunConfig& config);

}  // namespace dmc
