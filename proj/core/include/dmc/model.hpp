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
#include <span>
#include <string>
#include <vector>

#include "dmc/clustering.hpp"
#include "dmc/encoder.hpp"

namespace dmc {

/// Architecture of the two-stream model.
struct ModelConfig {
  std::size_t visual_patch = 4;
  std::size_t visual_channels = 3;
  std::size_t audio_patch = 4;
  std::size_t feature_dim = 32;  ///< n
  std::size_t center_dim = 32;   ///< m
  ClusterConfig cluster;
  double projection_gain = 20.0;  ///< scale of the projection initialization

  void validate() const;
};

/// A named view over one contiguous block of trainable parameters.
struct ParamBlock {
  std::string name;
  std::span<double> values;
};

struct ConstParamBlock {
  std::string name;
  std::span<const double> values;
};

struct Model {
  ModelConfig config;
  EncoderParams visual;
  EncoderParams audio;
  ProjectionBank bank{ProjectionBank::identity(1, 1)};

  static Model init(const ModelConfig& config, std::uint64_t seed);

  /// visual.weight, visual.bias, audio.weight, audio.bias, projection.0 ... projection.k-1
  std::vector<ParamBlock> blocks();
  std::vector<ConstParamBlock> blocks() const;
  std::size_t parameter_count() const;
};

}  // namespace dmc
