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
#include <vector>

#include "dmc/clustering.hpp"
#include "dmc/encoder.hpp"

namespace dmc {

/// Square blob on the visual patch grid: patches within Chebyshev distance
/// `radius` of (row, col).
struct VisualBlob {
  int row = 0;
  int col = 0;
  int radius = 0;
};

/// Rectangle on the audio patch grid: frames [t_begin, t_end) x bins [f_begin, f_end).
struct AudioBlob {
  int t_begin = 0;
  int t_end = 0;
  int f_begin = 0;
  int f_end = 0;
};

struct ComponentSignature {
  int id = 0;  ///< position within the scene
  Vector latent;
  VisualBlob visual_blob;
  AudioBlob audio_blob;  ///< empty for silent components
  double amplitude = 1.0;
  bool silent = false;
};

using Mask = std::vector<std::uint8_t>;  // row-major over a patch grid, 0 or 1

struct ScenePair {
  std::uint64_t seed = 0;
  RawGrid visual;
  RawGrid audio;
  GridShape visual_grid;
  GridShape audio_grid;
  std::vector<ComponentSignature> components;
  std::vector<Mask> visual_masks;
  std::vector<Mask> audio_masks;

  /// Union of the visual masks of every sounding component.
  Mask sounding_visual_mask() const;
};

struct GeneratorConfig {
  std::size_t visual_height = 32;
  std::size_t visual_width = 32;
  std::size_t visual_channels = 3;
  std::size_t visual_patch = 4;
  std::size_t audio_frames = 48;
  std::size_t audio_bins = 16;
  std::size_t audio_patch = 4;

  std::size_t latent_dim = 8;
  double latent_max_cosine = 0.3;  ///< bound on pairwise latent cosine within a scene
  std::size_t min_components = 1;
  std::size_t max_components = 3;
  int visual_radius_min = 1;
  int visual_radius_max = 2;
  int audio_span_min = 3;  ///< frames, in patch units
  int audio_span_max = 6;
  int audio_width_min = 1;  ///< bins, in patch units
  int audio_width_max = 4;
  double amplitude_min = 0.5;
  double amplitude_max = 1.0;
  double noise = 0.05;
  double distractor_prob = 0.3;
  std::uint64_t world_seed = 2019;
  int placement_attempts = 1000;

  GridShape visual_grid() const;
  GridShape audio_grid() const;
  void validate() const;
};

/// Projections that turn a component latent into a patch pattern in each
/// modality. Shared by every scene drawn with the same world seed.
class World {
 public:
  explicit World(const GeneratorConfig& config);

  /// Patch pattern (patch_rows * patch_cols * channels values), max |entry| = 1.
  Vector visual_pattern(const Vector& latent) const;
  Vector audio_pattern(const Vector& latent) const;

 private:
  Matrix visual_basis_;  // visual patch dim x L, orthonormal columns
  Matrix audio_basis_;
};

/// Positive scenes plus one mismatched audio per positive, all referring into
/// a dataset that must outlive the batch.
struct MatchBatch {
  std::span<const ScenePair> dataset;
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;

  std::size_t size() const { return positives.size(); }
  const ScenePair& positive(std::size_t b) const { return dataset[positives[b]]; }
  const RawGrid& negative_audio(std::size_t b) const { return dataset[negatives[b]].audio; }
};

namespace synth {

ScenePair generate_pair(std::uint64_t seed, const GeneratorConfig& config, const World& world);
ScenePair generate_pair(std::uint64_t seed, const GeneratorConfig& config);

/// Scenes seeded base_seed, base_seed + 1, ...
std::vector<ScenePair> generate_dataset(std::size_t count, std::uint64_t base_seed,
                                        const GeneratorConfig& config);

/// Uniform negative per positive, never the positive's own index.
MatchBatch make_batch(std::span<const ScenePair> dataset, std::span<const std::size_t> indices,
                      std::uint64_t seed);

}  // namespace synth
}  // namespace dmc
