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
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "dmc/clustering.hpp"
#include "dmc/model.hpp"
#include "dmc/synth.hpp"

namespace dmc {

/// One cluster's assignment column reshaped onto the feature grid.
struct Heatmap {
  GridShape grid;
  std::vector<double> values;  // row-major, each in [0, 1]
};

struct LocalizationReport {
  std::size_t chosen_cluster = 0;
  Vector cluster_scores;  ///< cosine of the pooled audio center with each visual center
  Heatmap heatmap;
  Mask mask;
  ClusterState visual_state;
  double iou = 0.0;  ///< binarized heatmap vs ground truth
  double ciou_at_0_5 = 0.0;
  double ciou_at_0_7 = 0.0;
  double auc = 0.0;
};

namespace eval {

inline constexpr double kDefaultThreshold = 0.7;
inline constexpr double kDefaultAucStep = 0.05;

Heatmap heatmap_for(const ClusterState& state, GridShape grid, std::size_t cluster);

/// Mean-pools the audio centers, picks the visual center with the highest
/// cosine proximity to it and returns that center's assignment column.
LocalizationReport localize(const FeatureSet& audio, const FeatureSet& visual,
                            const ProjectionBank& bank, const ClusterConfig& config,
                            double threshold = kDefaultThreshold);

/// Fills iou / cIoU / AUC fields of `report` against a ground-truth mask.
void score_localization(LocalizationReport& report, const Mask& truth,
                        double auc_step = kDefaultAucStep);

/// cell = 1 iff value >= threshold.
Mask binarize(const Heatmap& heatmap, double threshold);

/// |pred & gt| / |pred | gt|. Throws on shape mismatch or empty ground truth.
double iou(const Mask& pred, const Mask& truth);

/// Trapezoidal area under success(tau) = fraction of samples >= tau, tau over
/// the closed grid 0, step, ..., 1.
double auc_over_threshold(std::span<const double> samples, double step = kDefaultAucStep);

/// Fraction of samples with value >= threshold.
double success_rate(std::span<const double> samples, double threshold);

/// Greedy one-to-one matching of audio to visual clusters by descending cosine
/// proximity; ties go to the lower (audio, visual) index pair.
std::vector<std::pair<std::size_t, std::size_t>> match_clusters(const Matrix& audio_centers,
                                                                 const Matrix& visual_centers);

/// Scores how well an audio grid corresponds to a scene's visual grid.
using CorrespondenceScorer = std::function<double(const ScenePair& scene, const RawGrid& audio)>;

/// For each scene, true audio vs one mismatched audio from another scene;
/// fraction where the true audio scores strictly higher.
double match_accuracy(std::span<const ScenePair> scenes, const CorrespondenceScorer& scorer,
                      std::uint64_t seed);

/// Mean same-index center cosine between the audio and visual clusterings.
double model_score(const Model& model, const ScenePair& scene, const RawGrid& audio);

double match_accuracy(const Model& model, std::span<const ScenePair> scenes, std::uint64_t seed);

struct SceneMetrics {
  std::uint64_t seed = 0;
  std::size_t chosen_cluster = 0;
  double iou = 0.0;
  double unrelated_iou = 0.0;  ///< mean IoU of the non-chosen clusters
  bool success_0_5 = false;
  bool success_0_7 = false;
  double auc = 0.0;
  double true_score = 0.0;
  double mismatched_score = 0.0;
};

struct EvalSummary {
  std::vector<SceneMetrics> scenes;
  double ciou_0_5 = 0.0;
  double ciou_0_7 = 0.0;
  double auc = 0.0;
  double match_accuracy = 0.0;
  double mean_iou = 0.0;
  double mean_unrelated_iou = 0.0;
};

struct EvalOptions {
  double threshold = kDefaultThreshold;
  double auc_step = kDefaultAucStep;
  std::uint64_t seed = 0;
  /// Use ground-truth masks as predictions (sanity check of the metric path).
  bool oracle = false;
};

EvalSummary evaluate(const Model& model, std::span<const ScenePair> scenes,
                     const EvalOptions& options);

/// Per-scene rows followed by a `summary` row.
void write_metrics_csv(std::ostream& os, const EvalSummary& summary);

}  // namespace eval
}  // namespace dmc
