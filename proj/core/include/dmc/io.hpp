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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmc/eval.hpp"
#include "dmc/model.hpp"
#include "dmc/synth.hpp"

namespace dmc::io {

// All binary files are little-endian. Scene files:
//   "DMCS" u32 version=1 u64 seed
//   visual: u64 height, width, channels; audio: u64 frames, bins, channels
//   u64 visual grid rows, cols; u64 audio grid rows, cols
//   u64 component count, then per component:
//     i32 id, u8 silent, f64 amplitude, u64 L, L x f64 latent,
//     i32 row, col, radius (visual blob), i32 t_begin, t_end, f_begin, f_end (audio blob)
//   visual values (f64, row-major, channel fastest), audio values (f64)
//   per component: visual mask bytes (rows x cols), audio mask bytes
inline constexpr std::uint32_t kSceneVersion = 1;

// Model files:
//   "DMCM" u32 version=1
//   u64 visual_patch, visual_channels, audio_patch, feature_dim, center_dim, k, T
//   f64 z, f64 projection_gain, u8 visual nonlinearity, u8 audio nonlinearity
//   u64 block count, then per block (Model::blocks() order): u64 size, size x f64
inline constexpr std::uint32_t kModelVersion = 1;

void write_scene(std::ostream& os, const ScenePair& scene);
ScenePair read_scene(std::istream& is);
void save_scene(const std::filesystem::path& path, const ScenePair& scene);
ScenePair load_scene(const std::filesystem::path& path);

void write_model(std::ostream& os, const Model& model);
Model read_model(std::istream& is);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

struct ManifestEntry {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string file;
  std::size_t components = 0;
  std::size_t silent = 0;
};

inline constexpr const char* kManifestName = "manifest.csv";

/// Writes scenes plus `manifest.csv` into `dir` (created if missing).
void write_dataset(const std::filesystem::path& dir, const std::vector<ScenePair>& scenes);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);
std::vector<ScenePair> read_dataset(const std::filesystem::path& dir);

/// Binary PGM ("P5", maxval 255), pixel = round(255 * value) with values clamped to [0, 1].
void write_pgm(std::ostream& os, GridShape grid, const std::vector<double>& values);
void save_pgm(const std::filesystem::path& path, GridShape grid, const std::vector<double>& values);

}  // namespace dmc::io
