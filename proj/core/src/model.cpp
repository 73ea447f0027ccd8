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


#include "dmc/model.hpp"

#include <cmath>

#include "dmc/errors.hpp"
#include "dmc/random.hpp"

namespace dmc {

void ModelConfig::validate() const {
  cluster.validate();
  if (visual_patch == 0 || audio_patch == 0 || visual_channels == 0) {
    throw ConfigError("patch sizes and channel count must be positive");
  }
  if (feature_dim == 0 || center_dim == 0) {
    throw ConfigError("feature_dim and center_dim must be positive");
  }
  if (!(projection_gain > 0.0) || !std::isfinite(projection_gain)) {
    throw ConfigError("projection_gain must be positive");
  }
}

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model model;
  model.config = config;
  model.visual = EncoderParams::init(config.visual_patch, config.visual_patch,
                                     config.visual_channels, config.feature_dim,
                                     mix_seed(seed, 10));
  model.audio = EncoderParams::init(config.audio_patch, config.audio_patch, 1,
                                    config.feature_dim, mix_seed(seed, 11));

  const auto m = static_cast<Eigen::Index>(config.center_dim);
  const auto n = static_cast<Eigen::Index>(config.feature_dim);
  const double a = config.projection_gain * std::sqrt(1.0 / static_cast<double>(n));
  Rng rng(mix_seed(seed, 12));
  std::vector<Matrix> projections;
  for (std::size_t j = 0; j < config.cluster.k; ++j) {
    Matrix w(m, n);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < n; ++c) w(r, c) = rng.uniform(-a, a);
    projections.push_back(std::move(w));
  }
  model.bank = ProjectionBank(std::move(projections));
  return model;
}

namespace {

template <typename Block, typename Self>
std::vector<Block> collect_blocks(Self& model) {
  std::vector<Block> out;
  auto add = [&out](std::string name, auto& dense) {
    out.push_back({std::move(name), {dense.data(), static_cast<std::size_t>(dense.size())}});
  };
  add("visual.weight", model.visual.weight);
  add("visual.bias", model.visual.bias);
  add("audio.weight", model.audio.weight);
  add("audio.bias", model.audio.bias);
  for (std::size_t j = 0; j < model.bank.k(); ++j) {
    add("projection." + std::to_string(j), model.bank[j]);
  }
  return out;
}

}  // namespace

std::vector<ParamBlock> Model::blocks() { return collect_blocks<ParamBlock>(*this); }

std::vector<ConstParamBlock> Model::blocks() const {
  return collect_blocks<ConstParamBlock>(*this);
}

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for (const auto& b : blocks()) total += b.values.size();
  return total;
}

}  // namespace dmc
