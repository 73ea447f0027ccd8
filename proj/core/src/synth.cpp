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


#include "dmc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "dmc/errors.hpp"
#include "dmc/random.hpp"

namespace dmc {

namespace {

Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  const auto r = static_cast<Eigen::Index>(rows);
  const auto c = static_cast<Eigen::Index>(cols);
  Matrix gauss(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) gauss(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gauss);
  return qr.householderQ() * Matrix::Identity(r, c);
}

Vector peak_normalized(const Vector& v) {
  return v / v.cwiseAbs().maxCoeff();
}

bool inside(const VisualBlob& b, std::size_t row, std::size_t col) {
  return std::abs(static_cast<int>(row) - b.row) <= b.radius &&
         std::abs(static_cast<int>(col) - b.col) <= b.radius;
}

bool inside(const AudioBlob& b, std::size_t row, std::size_t col) {
  const int r = static_cast<int>(row);
  const int c = static_cast<int>(col);
  return r >= b.t_begin && r < b.t_end && c >= b.f_begin && c < b.f_end;
}

template <typename Blob>
Mask rasterize(const Blob& blob, GridShape grid) {
  Mask mask(grid.count(), 0);
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c) mask[r * grid.cols + c] = inside(blob, r, c);
  return mask;
}

bool overlaps(const Mask& mask, const Mask& occupied) {
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && occupied[i]) return true;
  return false;
}

void paint(RawGrid& grid, const Mask& mask, GridShape patch_grid, std::size_t patch,
           const Vector& pattern) {
  for (std::size_t pr = 0; pr < patch_grid.rows; ++pr) {
    for (std::size_t pc = 0; pc < patch_grid.cols; ++pc) {
      if (!mask[pr * patch_grid.cols + pc]) continue;
      Eigen::Index idx = 0;
      for (std::size_t dy = 0; dy < patch; ++dy)
        for (std::size_t dx = 0; dx < patch; ++dx)
          for (std::size_t ch = 0; ch < grid.channels; ++ch)
            grid.at(pr * patch + dy, pc * patch + dx, ch) = pattern(idx++);
    }
  }
}

Vector random_unit(std::size_t dim, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v / v.norm();
}

// Unit latent whose cosine to every latent already in the scene stays below
// config.latent_max_cosine.
Vector draw_latent(const std::vector<ComponentSignature>& placed, const GeneratorConfig& config,
                   Rng& rng, std::uint64_t seed) {
  for (int attempt = 0; attempt < config.placement_attempts; ++attempt) {
    Vector v = random_unit(config.latent_dim, rng);
    const bool separated = std::all_of(placed.begin(), placed.end(), [&](const auto& other) {
      return v.dot(other.latent) < config.latent_max_cosine;
    });
    if (separated) return v;
  }
  throw ConfigError("could not draw a separated latent for scene " + std::to_string(seed));
}

}  // namespace

Mask ScenePair::sounding_visual_mask() const {
  Mask out(visual_grid.count(), 0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (components[c].silent) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] |= visual_masks[c][i];
  }
  return out;
}

GridShape GeneratorConfig::visual_grid() const {
  return {visual_height / visual_patch, visual_width / visual_patch};
}

GridShape GeneratorConfig::audio_grid() const {
  return {audio_frames / audio_patch, audio_bins / audio_patch};
}

void GeneratorConfig::validate() const {
  if (visual_patch == 0 || audio_patch == 0 || visual_height % visual_patch != 0 ||
      visual_width % visual_patch != 0 || audio_frames % audio_patch != 0 ||
      audio_bins % audio_patch != 0) {
    throw ConfigError("grid sizes must be positive multiples of the patch size");
  }
  if (visual_channels == 0) throw ConfigError("visual_channels must be >= 1");
  if (latent_dim < 2) throw ConfigError("latent_dim must be >= 2");
  if (!(latent_max_cosine > -1.0 && latent_max_cosine < 1.0)) {
    throw ConfigError("latent_max_cosine must lie in (-1, 1)");
  }
  if (latent_dim > visual_patch * visual_patch * visual_channels ||
      latent_dim > audio_patch * audio_patch) {
    throw ConfigError("latent_dim exceeds the patch dimension of a modality");
  }
  if (min_components < 1 || min_components > max_components) {
    throw ConfigError("component count range must satisfy 1 <= min <= max");
  }
  if (!(noise >= 0.0) || !(distractor_prob >= 0.0 && distractor_prob <= 1.0)) {
    throw ConfigError("noise must be >= 0 and distractor_prob within [0, 1]");
  }
  if (!(amplitude_min > 0.0 && amplitude_min <= amplitude_max)) {
    throw ConfigError("amplitude range must satisfy 0 < min <= max");
  }
  const GridShape vg = visual_grid();
  const GridShape ag = audio_grid();
  if (visual_radius_min < 0 || visual_radius_min > visual_radius_max ||
      static_cast<std::size_t>(2 * visual_radius_max + 1) > std::min(vg.rows, vg.cols)) {
    throw ConfigError("visual blob radius range does not fit the visual grid");
  }
  if (audio_span_min < 1 || audio_span_min > audio_span_max ||
      static_cast<std::size_t>(audio_span_max) > ag.rows || audio_width_min < 1 ||
      audio_width_min > audio_width_max ||
      static_cast<std::size_t>(audio_width_max) > ag.cols) {
    throw ConfigError("audio blob spans do not fit the audio grid");
  }
  if (placement_attempts < 1) throw ConfigError("placement_attempts must be >= 1");

  const std::size_t visible = max_components + (distractor_prob > 0.0 ? 1 : 0);
  const auto side = static_cast<std::size_t>(2 * visual_radius_min + 1);
  const auto audio_area = static_cast<std::size_t>(audio_span_min * audio_width_min);
  if (visible * side * side > vg.count() || max_components * audio_area > ag.count()) {
    throw ConfigError("component count exceeds blob-packing capacity of the grids");
  }
}

World::World(const GeneratorConfig& config) {
  config.validate();
  Rng rng(mix_seed(config.world_seed, 0));
  visual_basis_ = orthonormal_columns(
      config.visual_patch * config.visual_patch * config.visual_channels, config.latent_dim, rng);
  audio_basis_ =
      orthonormal_columns(config.audio_patch * config.audio_patch, config.latent_dim, rng);
}

Vector World::visual_pattern(const Vector& latent) const {
  return peak_normalized(visual_basis_ * latent);
}

Vector World::audio_pattern(const Vector& latent) const {
  return peak_normalized(audio_basis_ * latent);
}

namespace synth {

ScenePair generate_pair(std::uint64_t seed, const GeneratorConfig& config, const World& world) {
  config.validate();
  Rng rng(mix_seed(seed, 1));

  ScenePair scene;
  scene.seed = seed;
  scene.visual_grid = config.visual_grid();
  scene.audio_grid = config.audio_grid();
  scene.visual = RawGrid(config.visual_height, config.visual_width, config.visual_channels,
                         Modality::kVisual);
  scene.audio = RawGrid(config.audio_frames, config.audio_bins, 1, Modality::kAudio);

  const auto sounding = static_cast<std::size_t>(rng.integer(
      static_cast<std::int64_t>(config.min_components),
      static_cast<std::int64_t>(config.max_components)));
  const bool distractor = rng.uniform() < config.distractor_prob;
  const std::size_t total = sounding + (distractor ? 1 : 0);

  const auto vrows = static_cast<int>(scene.visual_grid.rows);
  const auto vcols = static_cast<int>(scene.visual_grid.cols);
  const auto arows = static_cast<int>(scene.audio_grid.rows);
  const auto acols = static_cast<int>(scene.audio_grid.cols);

  for (std::size_t c = 0; c < total; ++c) {
    ComponentSignature comp;
    comp.id = static_cast<int>(c);
    comp.latent = draw_latent(scene.components, config, rng, seed);
    comp.silent = c >= sounding;
    comp.amplitude = rng.uniform(config.amplitude_min, config.amplitude_max);
    scene.components.push_back(std::move(comp));
  }

  // A layout that boxes itself in is discarded as a whole and redrawn.
  constexpr int kTriesPerBlob = 64;
  bool complete = false;
  for (int layout = 0; layout < config.placement_attempts && !complete; ++layout) {
    Mask visual_occupied(scene.visual_grid.count(), 0);
    Mask audio_occupied(scene.audio_grid.count(), 0);
    scene.visual_masks.clear();
    scene.audio_masks.clear();
    complete = true;
    for (ComponentSignature& comp : scene.components) {
      Mask vmask;
      bool placed = false;
      for (int attempt = 0; attempt < kTriesPerBlob && !placed; ++attempt) {
        const int r =
            static_cast<int>(rng.integer(config.visual_radius_min, config.visual_radius_max));
        comp.visual_blob = {static_cast<int>(rng.integer(r, vrows - 1 - r)),
                            static_cast<int>(rng.integer(r, vcols - 1 - r)), r};
        vmask = rasterize(comp.visual_blob, scene.visual_grid);
        placed = !overlaps(vmask, visual_occupied);
      }
      Mask amask(scene.audio_grid.count(), 0);
      comp.audio_blob = {};
      for (int attempt = 0; attempt < kTriesPerBlob && placed && !comp.silent; ++attempt) {
        const int span =
            static_cast<int>(rng.integer(config.audio_span_min, config.audio_span_max));
        const int width =
            static_cast<int>(rng.integer(config.audio_width_min, config.audio_width_max));
        const int t0 = static_cast<int>(rng.integer(0, arows - span));
        const int f0 = static_cast<int>(rng.integer(0, acols - width));
        comp.audio_blob = {t0, t0 + span, f0, f0 + width};
        amask = rasterize(comp.audio_blob, scene.audio_grid);
        if (!overlaps(amask, audio_occupied)) break;
        if (attempt + 1 == kTriesPerBlob) placed = false;
      }
      if (!placed) {
        complete = false;
        break;
      }
      for (std::size_t i = 0; i < vmask.size(); ++i) visual_occupied[i] |= vmask[i];
      for (std::size_t i = 0; i < amask.size(); ++i) audio_occupied[i] |= amask[i];
      scene.visual_masks.push_back(std::move(vmask));
      scene.audio_masks.push_back(std::move(amask));
    }
  }
  if (!complete) {
    throw ConfigError("could not lay out the components of scene " + std::to_string(seed));
  }

  for (std::size_t c = 0; c < total; ++c) {
    const ComponentSignature& comp = scene.components[c];
    paint(scene.visual, scene.visual_masks[c], scene.visual_grid, config.visual_patch,
          comp.amplitude * world.visual_pattern(comp.latent));
    if (!comp.silent) {
      paint(scene.audio, scene.audio_masks[c], scene.audio_grid, config.audio_patch,
            comp.amplitude * world.audio_pattern(comp.latent));
    }
  }

  if (config.noise > 0.0) {
    for (double& v : scene.visual.values) v += config.noise * rng.normal();
    for (double& v : scene.audio.values) v += config.noise * rng.normal();
  }
  scene.visual.clip();
  scene.audio.clip();
  return scene;
}

ScenePair generate_pair(std::uint64_t seed, const GeneratorConfig& config) {
  return generate_pair(seed, config, World(config));
}

std::vector<ScenePair> generate_dataset(std::size_t count, std::uint64_t base_seed,
                                        const GeneratorConfig& config) {
  const World world(config);
  std::vector<ScenePair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_pair(base_seed + i, config, world));
  return out;
}

MatchBatch make_batch(std::span<const ScenePair> dataset, std::span<const std::size_t> indices,
                      std::uint64_t seed) {
  if (dataset.size() < 2) throw ConfigError("make_batch: dataset needs at least 2 scenes");
  Rng rng(mix_seed(seed, 2));
  MatchBatch batch;
  batch.dataset = dataset;
  for (std::size_t i : indices) {
    if (i >= dataset.size()) throw InvalidArgument("make_batch: index out of range");
    std::size_t j = rng.index(dataset.size() - 1);
    if (j >= i) ++j;
    batch.positives.push_back(i);
    batch.negatives.push_back(j);
  }
  return batch;
}

}  // namespace synth
}  // namespace dmc
