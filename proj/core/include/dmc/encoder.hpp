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
#include <vector>

#include "dmc/clustering.hpp"
#include "dmc/numerics.hpp"

namespace dmc {

/// Dense H x W x C grid, channel fastest, values in [-1, 1]. Visual frames
/// use C = 3; audio spectrogram-like grids use H = time frames, W = bins, C = 1.
struct RawGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  Modality modality = Modality::kVisual;
  std::vector<double> values;

  RawGrid() = default;
  RawGrid(std::size_t h, std::size_t w, std::size_t c, Modality mod);

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return values[(row * width + col) * channels + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return values[(row * width + col) * channels + ch];
  }

  /// Clamp every value into [-1, 1].
  void clip();
  void validate() const;
};

enum class Nonlinearity { kTanh, kIdentity };

struct EncoderParams {
  std::size_t patch_rows = 4;
  std::size_t patch_cols = 4;
  std::size_t channels = 1;
  Nonlinearity nonlinearity = Nonlinearity::kTanh;
  Matrix weight;  // n x (patch_rows * patch_cols * channels)
  Vector bias;    // n

  std::size_t patch_dim() const { return patch_rows * patch_cols * channels; }
  std::size_t feature_dim() const { return static_cast<std::size_t>(weight.rows()); }

  /// Uniform(-a, a) weights and biases with a = sqrt(1 / fan_in).
  static EncoderParams init(std::size_t patch_rows, std::size_t patch_cols,
                            std::size_t channels, std::size_t feature_dim,
                            std::uint64_t seed);
};

struct EncoderGrads {
  Matrix weight;
  Vector bias;
};

namespace encoder {

/// Non-overlapping patches flattened (row, col, channel order), one per row,
/// patches enumerated row-major.
Matrix extract_patches(const RawGrid& grid, const EncoderParams& params);

GridShape patch_grid(const RawGrid& grid, const EncoderParams& params);

FeatureSet encode(const RawGrid& grid, const EncoderParams& params);

/// Reverse mode of encode: upstream holds dL/du (count x n).
EncoderGrads encoder_backward(const Matrix& upstream, const EncoderParams& params,
                              const RawGrid& grid);

}  // namespace encoder
}  // namespace dmc
