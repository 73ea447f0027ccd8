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


#include "dmc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dmc/encoder.hpp"
#include "dmc/errors.hpp"
#include "dmc/loss.hpp"
#include "dmc/random.hpp"

namespace dmc::eval {

Heatmap heatmap_for(const ClusterState& state, GridShape grid, std::size_t cluster) {
  const Matrix& s = state.assignments;
  if (static_cast<std::size_t>(s.rows()) != grid.count()) {
    throw ShapeError("heatmap: assignment rows do not cover the grid");
  }
  if (cluster >= static_cast<std::size_t>(s.cols())) {
    throw InvalidArgument("heatmap: cluster index out of range");
  }
  Heatmap h{grid, std::vector<double>(grid.count())};
  for (std::size_t i = 0; i < grid.count(); ++i) {
    h.values[i] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cluster));
  }
  return h;
}

LocalizationReport localize(const FeatureSet& audio, const FeatureSet& visual,
                            const ProjectionBank& bank, const ClusterConfig& config,
                            double threshold) {
  const ClusterState audio_state = clustering::run_clustering(audio, bank, config);
  LocalizationReport report;
  report.visual_state = clustering::run_clustering(visual, bank, config);

  const Vector pooled = audio_state.centers.rowwise().mean();
  if (pooled.norm() < numerics::kDegenerateNorm) {
    throw DegenerateVectorError("localize: pooled audio center is degenerate");
  }
  const Matrix& vc = report.visual_state.centers;
  report.cluster_scores.resize(vc.cols());
  for (Eigen::Index j = 0; j < vc.cols(); ++j) {
    report.cluster_scores(j) = numerics::cosine_similarity(pooled, vc.col(j));
  }
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < vc.cols(); ++j) {
    if (report.cluster_scores(j) > report.cluster_scores(best)) best = j;
  }
  report.chosen_cluster = static_cast<std::size_t>(best);
  report.heatmap = heatmap_for(report.visual_state, visual.grid(), report.chosen_cluster);
  report.mask = binarize(report.heatmap, threshold);
  return report;
}

void score_localization(LocalizationReport& report, const Mask& truth, double auc_step) {
  report.iou = iou(report.mask, truth);
  report.ciou_at_0_5 = report.iou >= 0.5 ? 1.0 : 0.0;
  report.ciou_at_0_7 = report.iou >= 0.7 ? 1.0 : 0.0;
  const double sample[] = {report.iou};
  report.auc = auc_over_threshold(sample, auc_step);
}

Mask binarize(const Heatmap& heatmap, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidArgument("binarize: threshold must lie in [0, 1]");
  }
  Mask out(heatmap.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = heatmap.values[i] >= threshold ? 1 : 0;
  return out;
}

double iou(const Mask& pred, const Mask& truth) {
  if (pred.size() != truth.size()) throw ShapeError("iou: mask shapes differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  std::size_t truth_count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool t = truth[i] != 0;
    inter += p && t;
    uni += p || t;
    truth_count += t;
  }
  if (truth_count == 0) throw InvalidArgument("iou: ground-truth mask is empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double success_rate(std::span<const double> samples, double threshold) {
  if (samples.empty()) throw InvalidArgument("success_rate: no samples");
  const auto hits = std::count_if(samples.begin(), samples.end(),
                                  [threshold](double v) { return v >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double auc_over_threshold(std::span<const double> samples, double step) {
  if (samples.empty()) throw InvalidArgument("auc_over_threshold: no samples");
  if (!(step > 0.0 && step <= 1.0)) throw InvalidArgument("auc_over_threshold: bad step");
  const double intervals = std::round(1.0 / step);
  if (std::abs(intervals * step - 1.0) > 1e-9) {
    throw InvalidArgument("auc_over_threshold: step must divide 1 evenly");
  }
  for (double v : samples) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("auc_over_threshold: value outside [0, 1]");
  }
  const auto n = static_cast<std::size_t>(intervals);
  double area = 0.0;
  double prev = success_rate(samples, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(n);
    const double cur = success_rate(samples, tau);
    area += 0.5 * (prev + cur) / static_cast<double>(n);
    prev = cur;
  }
  return area;
}

std::vector<std::pair<std::size_t, std::size_t>> match_clusters(const Matrix& audio_centers,
                                                                 const Matrix& visual_centers) {
  if (audio_centers.rows() != visual_centers.rows()) {
    throw ShapeError("match_clusters: center dimensions differ");
  }
  const auto ka = static_cast<std::size_t>(audio_centers.cols());
  const auto kv = static_cast<std::size_t>(visual_centers.cols());
  Matrix prox(audio_centers.cols(), visual_centers.cols());
  for (Eigen::Index a = 0; a < prox.rows(); ++a)
    for (Eigen::Index v = 0; v < prox.cols(); ++v)
      prox(a, v) = numerics::cosine_similarity(audio_centers.col(a), visual_centers.col(v));

  std::vector<bool> used_a(ka, false);
  std::vector<bool> used_v(kv, false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t round = 0; round < std::min(ka, kv); ++round) {
    double best = -std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> pick{0, 0};
    for (std::size_t a = 0; a < ka; ++a) {
      if (used_a[a]) continue;
      for (std::size_t v = 0; v < kv; ++v) {
        if (used_v[v]) continue;
        const double p = prox(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(v));
        if (p > best) {
          best = p;
          pick = {a, v};
        }
      }
    }
    used_a[pick.first] = true;
    used_v[pick.second] = true;
    out.push_back(pick);
  }
  return out;
}

namespace {

std::vector<std::size_t> mismatch_indices(std::size_t count, std::uint64_t seed) {
  if (count < 2) throw InvalidArgument("match_accuracy: need at least 2 scenes");
  Rng rng(mix_seed(seed, 3));
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = rng.index(count - 1);
    out[i] = j >= i ? j + 1 : j;
  }
  return out;
}

}  // namespace

double match_accuracy(std::span<const ScenePair> scenes, const CorrespondenceScorer& scorer,
                      std::uint64_t seed) {
  const auto other = mismatch_indices(scenes.size(), seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    hits += scorer(scenes[i], scenes[i].audio) > scorer(scenes[i], scenes[other[i]].audio);
  }
  return static_cast<double>(hits) / static_cast<double>(scenes.size());
}

double model_score(const Model& model, const ScenePair& scene, const RawGrid& audio) {
  const ClusterState v = clustering::run_clustering(encoder::encode(scene.visual, model.visual),
                                                    model.bank, model.config.cluster);
  const ClusterState a = clustering::run_clustering(encoder::encode(audio, model.audio),
                                                    model.bank, model.config.cluster);
  return loss::center_scores(a.centers, v.centers).mean();
}

double match_accuracy(const Model& model, std::span<const ScenePair> scenes, std::uint64_t seed) {
  return match_accuracy(
      scenes,
      [&model](const ScenePair& scene, const RawGrid& audio) {
        return model_score(model, scene, audio);
      },
      seed);
}

EvalSummary evaluate(const Model& model, std::span<const ScenePair> scenes,
                     const EvalOptions& options) {
  const auto other = mismatch_indices(scenes.size(), options.seed);
  EvalSummary summary;
  std::vector<double> ious;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const ScenePair& scene = scenes[i];
    const Mask truth = scene.sounding_visual_mask();
    SceneMetrics row;
    row.seed = scene.seed;

    const FeatureSet fv = encoder::encode(scene.visual, model.visual);
    const FeatureSet fa = encoder::encode(scene.audio, model.audio);
    if (options.oracle) {
      row.iou = iou(truth, truth);
    } else {
      LocalizationReport report =
          localize(fa, fv, model.bank, model.config.cluster, options.threshold);
      score_localization(report, truth, options.auc_step);
      row.chosen_cluster = report.chosen_cluster;
      row.iou = report.iou;
      const std::size_t k = model.bank.k();
      if (k > 1) {
        for (std::size_t j = 0; j < k; ++j) {
          if (j == report.chosen_cluster) continue;
          row.unrelated_iou +=
              iou(binarize(heatmap_for(report.visual_state, fv.grid(), j), options.threshold),
                  truth);
        }
        row.unrelated_iou /= static_cast<double>(k - 1);
      }
    }
    row.success_0_5 = row.iou >= 0.5;
    row.success_0_7 = row.iou >= 0.7;
    const double sample[] = {row.iou};
    row.auc = auc_over_threshold(sample, options.auc_step);
    row.true_score = model_score(model, scene, scene.audio);
    row.mismatched_score = model_score(model, scene, scenes[other[i]].audio);
    matched += row.true_score > row.mismatched_score;
    ious.push_back(row.iou);
    summary.mean_iou += row.iou;
    summary.mean_unrelated_iou += row.unrelated_iou;
    summary.scenes.push_back(row);
  }
  const double n = static_cast<double>(scenes.size());
  summary.mean_iou /= n;
  summary.mean_unrelated_iou /= n;
  summary.ciou_0_5 = success_rate(ious, 0.5);
  summary.ciou_0_7 = success_rate(ious, 0.7);
  summary.auc = auc_over_threshold(ious, options.auc_step);
  summary.match_accuracy = static_cast<double>(matched) / n;
  return summary;
}

void write_metrics_csv(std::ostream& os, const EvalSummary& summary) {
  os << "row,seed,chosen_cluster,iou,unrelated_iou,ciou@0.5,ciou@0.7,auc,match_accuracy\n";
  for (std::size_t i = 0; i < summary.scenes.size(); ++i) {
    const SceneMetrics& s = summary.scenes[i];
    fmt::print(os, "{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", i, s.seed,
               s.chosen_cluster, s.iou, s.unrelated_iou, s.success_0_5 ? 1.0 : 0.0,
               s.success_0_7 ? 1.0 : 0.0, s.auc,
               s.true_score > s.mismatched_score ? 1.0 : 0.0);
  }
  fmt::print(os, "summary,,,{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", summary.mean_iou,
             summary.mean_unrelated_iou, summary.ciou_0_5, summary.ciou_0_7, summary.auc,
             summary.match_accuracy);
}

}  // namespace dmc::eval
