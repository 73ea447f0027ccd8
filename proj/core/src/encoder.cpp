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


#include "dmc/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmc/errors.hpp"
#include "dmc/random.hpp"

namespace dmc {

RawGrid::RawGrid(std::size_t h, std::size_t w, std::size_t c, Modality mod)
    : height(h), width(w), channels(c), modality(mod), values(h * w * c, 0.0) {}

void RawGrid::clip() {
  for (double& v : values) v = std::clamp(v, -1.0, 1.0);
}

void RawGrid::validate() const {
  if (values.size() != height * width * channels || values.empty()) {
    throw ShapeError("RawGrid: value count does not match dimensions");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
      throw InvalidArgument("RawGrid: values must be finite and within [-1, 1]");
    }
  }
}

EncoderParams EncoderParams::init(std::size_t patch_rows, std::size_t patch_cols,
                                  std::size_t channels, std::size_t feature_dim,
                                  std::uint64_t seed) {
  EncoderParams p;
  p.patch_rows = patch_rows;
  p.patch_cols = patch_cols;
  p.channels = channels;
  const auto fan_in = static_cast<Eigen::Index>(p.patch_dim());
  const auto n = static_cast<Eigen::Index>(feature_dim);
  const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
  Rng rng(seed);
  p.weight.resize(n, fan_in);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < fan_in; ++c) p.weight(r, c) = rng.uniform(-a, a);
  p.bias.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) p.bias(r) = rng.uniform(-a, a);
  return p;
}

namespace encoder {

GridShape patch_grid(const RawGrid& grid, const EncoderParams& params) {
  if (params.patch_rows == 0 || params.patch_cols == 0 ||
      grid.height % params.patch_rows != 0 || grid.width % params.patch_cols != 0) {
    throw ShapeError("encoder: grid " + std::to_string(grid.height) + "x" +
                     std::to_string(grid.width) + " is not divisible into " +
                     std::to_string(params.patch_rows) + "x" +
                     std::to_string(params.patch_cols) + " patches");
  }
  if (grid.channels != params.channels) {
    throw ShapeError("encoder: grid has " + std::to_string(grid.channels) +
                     " channels, encoder expects " + std::to_string(params.channels));
  }
  return {grid.height / params.patch_rows, grid.width / params.patch_cols};
}

Matrix extract_patches(const RawGrid& grid, const EncoderParams& params) {
  const GridShape shape = patch_grid(grid, params);
  if (grid.values.size() != grid.height * grid.width * grid.channels) {
    throw ShapeError("encoder: grid value count does not match dimensions");
  }
  Matrix patches(static_cast<Eigen::Index>(shape.count()),
                 static_cast<Eigen::Index>(params.patch_dim()));
  for (std::size_t pr = 0; pr < shape.rows; ++pr) {
    for (std::size_t pc = 0; pc < shape.cols; ++pc) {
      const auto row = static_cast<Eigen::Index>(pr * shape.cols + pc);
      Eigen::Index col = 0;
      for (std::size_t dy = 0; dy < params.patch_rows; ++dy)
        for (std::size_t dx = 0; dx < params.patch_cols; ++dx)
          for (std::size_t ch = 0; ch < params.channels; ++ch)
            patches(row, col++) =
                grid.at(pr * params.patch_rows + dy, pc * params.patch_cols + dx, ch);
    }
  }
  return patches;
}

namespace {

void check_params(const EncoderParams& params) {
  if (static_cast<std::size_t>(params.weight.cols()) != params.patch_dim() ||
      params.bias.size() != params.weight.rows()) {
    throw ShapeError("encoder: parameter shapes do not match patch layout");
  }
}

}  // namespace

FeatureSet encode(const RawGrid& grid, const EncoderParams& params) {
  check_params(params);
  const GridShape shape = patch_grid(grid, params);
  Matrix pre = extract_patches(grid, params) * params.weight.transpose();
  pre.rowwise() += params.bias.transpose();
  if (params.nonlinearity == Nonlinearity::kTanh) pre = pre.array().tanh().matrix();
  return FeatureSet(std::move(pre), shape, grid.modality);
}

EncoderGrads encoder_backward(const Matrix& upstream, const EncoderParams& params,
                              const RawGrid& grid) {
  check_params(params);
  const Matrix patches = extract_patches(grid, params);
  if (upstream.rows() != patches.rows() || upstream.cols() != params.weight.rows()) {
    throw ShapeError("encoder_backward: upstream gradient shape mismatch");
  }
  Matrix grad_pre = upstream;
  if (params.nonlinearity == Nonlinearity::kTanh) {
    Matrix pre = patches * params.weight.transpose();
    pre.rowwise() += params.bias.transpose();
    const Matrix out = pre.array().tanh().matrix();
    grad_pre = (upstream.array() * (1.0 - out.array().square())).matrix();
  }
  EncoderGrads g;
  g.weight = grad_pre.transpose() * patches;
  g.bias = grad_pre.colwise().sum().transpose();
  return g;
}

}  // namespace encoder
}  // namespace dmc
