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

// Small hand-built models and scenes for gradient and property tests.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dmc/model.hpp"
#include "dmc/random.hpp"
#include "dmc/synth.hpp"

namespace dmc::testing {

struct TinyShape {
  std::size_t visual_rows = 5;  // patch grid rows, one patch per row
  std::size_t audio_rows = 6;
  std::size_t patch_cols = 2;   // patch = 1 x patch_cols pixels, one channel
  std::size_t n = 4;
  std::size_t m = 3;
  std::size_t k = 2;
  std::size_t iterations = 2;
  double z = 1.0;
  double gain = 1.0;
};

inline RawGrid random_raw(Rng& rng, std::size_t rows, std::size_t cols, Modality mod) {
  RawGrid g(rows, cols, 1, mod);
  for (double& v : g.values) v = rng.uniform(-1.0, 1.0);
  return g;
}

inline std::vector<ScenePair> tiny_scenes(const TinyShape& s, std::size_t count,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScenePair> out;
  for (std::size_t i = 0; i < count; ++i) {
    ScenePair p;
    p.seed = seed + i;
    p.visual = random_raw(rng, s.visual_rows, s.patch_cols, Modality::kVisual);
    p.audio = random_raw(rng, s.audio_rows, s.patch_cols, Modality::kAudio);
    p.visual_grid = {s.visual_rows, 1};
    p.audio_grid = {s.audio_rows, 1};
    out.push_back(std::move(p));
  }
  return out;
}

inline Model tiny_model(const TinyShape& s, std::uint64_t seed) {
  Model model;
  model.config.visual_patch = 1;
  model.config.visual_channels = 1;
  model.config.audio_patch = 1;
  model.config.feature_dim = s.n;
  model.config.center_dim = s.m;
  model.config.cluster = {s.k, s.iterations, s.z};
  model.config.projection_gain = s.gain;
  model.visual = EncoderParams::init(1, s.patch_cols, 1, s.n, mix_seed(seed, 1));
  model.audio = EncoderParams::init(1, s.patch_cols, 1, s.n, mix_seed(seed, 2));
  Rng rng(mix_seed(seed, 3));
  std::vector<Matrix> w;
  for (std::size_t j = 0; j < s.k; ++j) {
    Matrix mj(static_cast<Eigen::Index>(s.m), static_cast<Eigen::Index>(s.n));
    for (Eigen::Index i = 0; i < mj.size(); ++i) mj(i) = s.gain * rng.uniform(-1.0, 1.0);
    w.push_back(std::move(mj));
  }
  model.bank = ProjectionBank(std::move(w));
  return model;
}

}  // namespace dmc::testing
