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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dmc/clustering.hpp"
#include "dmc/encoder.hpp"
#include "dmc/loss.hpp"
#include "dmc/model.hpp"
#include "dmc/synth.hpp"

namespace dmc {

struct ClusterGrads {
  Matrix features;                  // count x n
  std::vector<Matrix> projections;  // k matrices, m x n
};

/// Gradients of the loss for the three feature sets of one sample.
struct SampleFeatureGrads {
  Matrix visual;
  Matrix audio;
  Matrix negative;
};

struct GradientBundle {
  EncoderGrads visual_encoder;
  EncoderGrads audio_encoder;
  std::vector<Matrix> projections;
  std::vector<SampleFeatureGrads> features;  // one entry per batch sample

  /// Same order as Model::blocks().
  std::vector<std::span<const double>> blocks() const;
};

struct HeadOptions {
  /// Treat visual centers as constants (audio-only diagnostic).
  bool detach_visual = false;
};

/// Forward pass of the clustering head on one (visual, audio, negative audio)
/// triple.
struct HeadForward {
  ClusterTrace visual;
  ClusterTrace audio;
  ClusterTrace negative;
  MarginBreakdown margin;
};

struct HeadGrads {
  double loss = 0.0;
  SampleFeatureGrads features;
  std::vector<Matrix> projections;
};

struct BatchResult {
  double loss = 0.0;  ///< mean per-sample margin loss
  double positive_score_mean = 0.0;
  double negative_score_mean = 0.0;
  double min_abs_hinge = 0.0;       ///< distance of the closest hinge to its kink
  std::vector<bool> hinge_pattern;  ///< activity of every hinge, sample-major
};

struct BatchGrads {
  BatchResult result;
  GradientBundle grads;
};

namespace grad {

/// Reverse mode through all unrolled iterations. Any of the upstream
/// gradients may be empty (treated as zero).
ClusterGrads cluster_backward(const FeatureSet& features, const ProjectionBank& bank,
                              const ClusterConfig& config, const ClusterTrace& trace,
                              const Matrix& grad_centers, const Matrix& grad_assignments = {},
                              const Matrix& grad_distances = {});

HeadForward head_forward(const FeatureSet& visual, const FeatureSet& audio,
                         const FeatureSet& negative, const ProjectionBank& bank,
                         const ClusterConfig& config, const LossConfig& loss_config);

HeadGrads head_backward(const FeatureSet& visual, const FeatureSet& audio,
                        const FeatureSet& negative, const ProjectionBank& bank,
                        const ClusterConfig& config, const LossConfig& loss_config,
                        const HeadOptions& options = {});

BatchResult evaluate_batch(const MatchBatch& batch, const Model& model,
                           const LossConfig& loss_config);

/// Loss of the batch and its exact gradient with respect to every parameter.
BatchGrads backward(const MatchBatch& batch, const Model& model, const LossConfig& loss_config,
                    const HeadOptions& options = {});

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

struct BlockError {
  std::string name;
  double rel_error = 0.0;
  std::size_t coordinates = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<BlockError> blocks;
  double step = 0.0;
};

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t coords_per_block = 200;
  std::uint64_t seed = 0;
  /// Hinges closer than this to their kink make the point non-differentiable.
  double kink_guard = 1e-6;
  /// Test hook: added to every analytic gradient entry before comparison.
  double corrupt_analytic = 0.0;
};

/// Central differences on a random subset of coordinates of one block. `loss`
/// is re-evaluated with `theta` perturbed in place and restored afterwards.
BlockError check_block(const std::string& name, std::span<double> theta,
                       std::span<const double> analytic, const std::function<double()>& loss,
                       const GradCheckOptions& options, std::uint64_t stream);

/// Checks every model parameter block plus the features of the first sample.
/// Throws ResampleRequired when a hinge sits within kink_guard of its kink or
/// a perturbation flips any hinge.
GradCheckReport grad_check(const Model& model, const MatchBatch& batch,
                           const LossConfig& loss_config, const GradCheckOptions& options);

}  // namespace grad
}  // namespace dmc
