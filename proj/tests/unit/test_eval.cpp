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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dmc/errors.hpp"
#include "dmc/eval.hpp"
#include "dmc/random.hpp"
#include "tiny.hpp"

namespace dmc {
namespace {

Mask count_mask(std::size_t size, std::initializer_list<std::size_t> on) {
  Mask m(size, 0);
  for (std::size_t i : on) m[i] = 1;
  return m;
}

TEST(Binarize, Examples) {
  const Heatmap h{{2, 2}, {0.8, 0.3, 0.71, 0.69}};
  EXPECT_EQ(eval::binarize(h, 0.7), (Mask{1, 0, 1, 0}));
  EXPECT_EQ(eval::binarize(h, 0.0), (Mask{1, 1, 1, 1}));
  EXPECT_EQ(eval::binarize(h, 0.81), (Mask{0, 0, 0, 0}));
  EXPECT_EQ(eval::binarize(h, 0.8), (Mask{1, 0, 0, 0}));
  EXPECT_THROW(eval::binarize(h, 1.5), InvalidArgument);
  EXPECT_THROW(eval::binarize(h, -0.1), InvalidArgument);
}

TEST(Iou, Examples) {
  const Mask gt = count_mask(10, {0, 1, 2, 3});
  EXPECT_EQ(eval::iou(gt, gt), 1.0);
  EXPECT_EQ(eval::iou(count_mask(10, {5, 6}), gt), 0.0);
  EXPECT_NEAR(eval::iou(count_mask(10, {2, 3, 4, 5}), gt), 2.0 / 6.0, 1e-15);
  EXPECT_EQ(eval::iou(Mask(10, 0), gt), 0.0);
  EXPECT_THROW(eval::iou(Mask(10, 1), Mask(10, 0)), InvalidArgument);
  EXPECT_THROW(eval::iou(Mask(9, 1), gt), ShapeError);
}

TEST(Iou, SymmetricAndPermutationInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Mask a(12), b(12);
    for (auto& v : a) v = rng.uniform() < 0.4;
    for (auto& v : b) v = rng.uniform() < 0.4;
    a[rng.index(12)] = 1;
    b[rng.index(12)] = 1;
    EXPECT_EQ(eval::iou(a, b), eval::iou(b, a));
    std::vector<std::size_t> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 11; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    Mask pa(12), pb(12);
    for (std::size_t i = 0; i < 12; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    EXPECT_EQ(eval::iou(pa, pb), eval::iou(a, b));
  }
}

TEST(Auc, Conventions) {
  const std::vector<double> ones(7, 1.0), zeros(7, 0.0);
  EXPECT_NEAR(eval::auc_over_threshold(ones), 1.0, 1e-12);
  // success(0) = 1 by the closed comparison; every later grid point fails.
  EXPECT_NEAR(eval::auc_over_threshold(zeros), 0.05 / 2.0, 1e-12);
  EXPECT_NEAR(eval::auc_over_threshold(zeros, 0.25), 0.125, 1e-12);
  EXPECT_THROW(eval::auc_over_threshold(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(eval::auc_over_threshold(ones, 0.3), InvalidArgument);
  EXPECT_THROW(eval::auc_over_threshold(std::vector<double>{1.2}), InvalidArgument);
}

TEST(Auc, HalfAndHalfMatchesDirectSum) {
  std::vector<double> s(100, 0.0);
  std::fill(s.begin(), s.begin() + 50, 1.0);
  const double step = 0.05;
  double oracle = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto success = [&](double tau) {
      return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v >= tau; })) /
             100.0;
    };
    oracle += 0.5 * step * (success(i * step) + success((i + 1) * step));
  }
  const double auc = eval::auc_over_threshold(s, step);
  EXPECT_NEAR(auc, oracle, 1e-12);
  EXPECT_NEAR(auc, 0.5, step / 2);
}

TEST(Auc, MonotoneInEachSample) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(1 + rng.index(10));
    for (double& v : s) v = rng.uniform();
    const double before = eval::auc_over_threshold(s);
    const std::size_t i = rng.index(s.size());
    s[i] = std::min(1.0, s[i] + rng.uniform(0.0, 0.5));
    EXPECT_GE(eval::auc_over_threshold(s), before - 1e-15);
  }
}

TEST(Auc, EqualsMeanOfCappedGridForSingleSample) {
  // One sample x: success is 1 up to the last grid point <= x.
  const double x = 0.62;
  const double expected = 0.60 + 0.5 * 0.05;
  EXPECT_NEAR(eval::auc_over_threshold(std::vector<double>{x}), expected, 1e-12);
}

TEST(MatchClusters, GreedyWithLowerIndexTies) {
  Matrix a(2, 2), v(2, 2);
  a << 1, 0, 0, 1;
  v << 0, 1, 1, 0;
  const auto m = eval::match_clusters(a, v);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(m[1], (std::pair<std::size_t, std::size_t>{1, 0}));
  const Matrix same = Matrix::Ones(2, 2);
  const auto t = eval::match_clusters(same, same);
  EXPECT_EQ(t[0], (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_EQ(t[1], (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_THROW(eval::match_clusters(Matrix::Ones(3, 2), same), ShapeError);
}

FeatureSet features(Rng& rng, std::size_t rows, std::size_t cols, std::size_t n, Modality mod) {
  Matrix u(static_cast<Eigen::Index>(rows * cols), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.uniform(-1.0, 1.0);
  return FeatureSet(u, {rows, cols}, mod);
}

TEST(Localize, SingleClusterIsForced) {
  Rng rng(3);
  const FeatureSet a = features(rng, 3, 2, 4, Modality::kAudio);
  const FeatureSet v = features(rng, 2, 3, 4, Modality::kVisual);
  const ProjectionBank bank = ProjectionBank::identity(1, 4);
  const ClusterConfig cfg{1, 3, 1.0};
  const LocalizationReport r = eval::localize(a, v, bank, cfg);
  EXPECT_EQ(r.chosen_cluster, 0u);
  for (double h : r.heatmap.values) EXPECT_EQ(h, 1.0);
  EXPECT_EQ(r.heatmap.grid, (GridShape{2, 3}));
}

TEST(Localize, PicksTheVisualCenterAlignedWithPooledAudio) {
  // Audio sits on e0. Visual clusters: one along e0, one along e1.
  Matrix ua(2, 2);
  ua << 1, 0, 2, 0;
  Matrix uv(4, 2);
  uv << 0, 1, 1, 0, 0, 1, 1, 0;
  const FeatureSet a(ua, {2, 1}, Modality::kAudio);
  const FeatureSet v(uv, {2, 2}, Modality::kVisual);
  std::vector<Matrix> w(2, Matrix::Identity(2, 2));
  w[1](0, 0) = 0.1;
  w[0](1, 1) = 0.1;
  const ProjectionBank bank(w);
  const ClusterConfig cfg{2, 5, 20.0};
  const LocalizationReport r = eval::localize(a, v, bank, cfg);
  const Matrix& vc = r.visual_state.centers;
  const std::size_t along_e0 = std::abs(vc(0, 0) / vc.col(0).norm()) > std::abs(vc(0, 1) / vc.col(1).norm()) ? 0 : 1;
  EXPECT_EQ(r.chosen_cluster, along_e0);
  // Patches 1 and 3 lie along e0 whichever index that cluster received.
  EXPECT_EQ(r.mask, (Mask{0, 1, 0, 1}));
  EXPECT_GE(r.cluster_scores(static_cast<Eigen::Index>(r.chosen_cluster)),
            r.cluster_scores(static_cast<Eigen::Index>(1 - r.chosen_cluster)));
}

TEST(Localize, ChoiceInvariantToVisualCenterScale) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const FeatureSet a = features(rng, 3, 2, 4, Modality::kAudio);
    const FeatureSet v = features(rng, 3, 3, 4, Modality::kVisual);
    std::vector<Matrix> w;
    for (int j = 0; j < 2; ++j) {
      Matrix m(4, 4);
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-1.0, 1.0);
      w.push_back(m);
    }
    const ClusterConfig cfg{2, 1, 1.0};
    const LocalizationReport base = eval::localize(a, v, ProjectionBank(w), cfg);
    // With T = 1 the visual assignments never see the projection scale, only
    // the centers grow; scaling every W_j together rescales both center sets.
    std::vector<Matrix> scaled = w;
    for (auto& m : scaled) m *= 3.5;
    const LocalizationReport r = eval::localize(a, v, ProjectionBank(scaled), cfg);
    EXPECT_EQ(r.chosen_cluster, base.chosen_cluster);
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_NEAR(r.cluster_scores(j), base.cluster_scores(j), 1e-12);
  }
}

TEST(Localize, DegeneratePooledCenterThrows) {
  const FeatureSet a(Matrix::Zero(2, 3), {2, 1}, Modality::kAudio);
  Rng rng(5);
  const FeatureSet v = features(rng, 2, 2, 3, Modality::kVisual);
  EXPECT_THROW(eval::localize(a, v, ProjectionBank::identity(2, 3), ClusterConfig{2, 1, 1.0}),
               DegenerateVectorError);
}

TEST(Heatmap, ColumnReshapeAndBounds) {
  ClusterState s;
  s.assignments.resize(6, 2);
  for (Eigen::Index i = 0; i < 6; ++i) {
    s.assignments(i, 0) = 0.1 * static_cast<double>(i);
    s.assignments(i, 1) = 1.0 - s.assignments(i, 0);
  }
  const Heatmap h = eval::heatmap_for(s, {2, 3}, 1);
  EXPECT_NEAR(h.values[4], 0.6, 1e-15);
  EXPECT_THROW(eval::heatmap_for(s, {2, 2}, 0), ShapeError);
  EXPECT_THROW(eval::heatmap_for(s, {2, 3}, 2), InvalidArgument);
}

TEST(MatchAccuracy, OracleScorerIsPerfect) {
  const auto scenes = synth::generate_dataset(40, 100, GeneratorConfig{});
  const eval::CorrespondenceScorer oracle = [](const ScenePair& scene, const RawGrid& audio) {
    return audio.values == scene.audio.values ? 1.0 : 0.0;
  };
  EXPECT_EQ(eval::match_accuracy(scenes, oracle, 3), 1.0);
  const eval::CorrespondenceScorer flat = [](const ScenePair&, const RawGrid&) { return 0.0; };
  EXPECT_EQ(eval::match_accuracy(scenes, flat, 3), 0.0);
  EXPECT_THROW(eval::match_accuracy(std::span(scenes).first(1), oracle, 3), InvalidArgument);
}

TEST(MatchAccuracy, UntrainedModelIsNearChance) {
  GeneratorConfig gen;
  gen.visual_height = gen.visual_width = 16;
  gen.audio_frames = 24;
  gen.audio_bins = 8;
  gen.max_components = 2;
  gen.visual_radius_min = 0;
  gen.visual_radius_max = 1;
  gen.audio_span_max = 4;
  gen.audio_width_max = 2;
  const auto scenes = synth::generate_dataset(500, 200, gen);
  ModelConfig mc;
  mc.feature_dim = mc.center_dim = 16;
  const double acc = eval::match_accuracy(Model::init(mc, 7), scenes, 11);
  EXPECT_NEAR(acc, 0.5, 0.1);
}

TEST(Evaluate, OracleMasksScorePerfectly) {
  const testing::TinyShape shape;
  const auto scenes = synth::generate_dataset(6, 300, GeneratorConfig{});
  const Model model = Model::init(ModelConfig{}, 3);
  eval::EvalOptions opt;
  opt.oracle = true;
  const eval::EvalSummary s = eval::evaluate(model, scenes, opt);
  EXPECT_EQ(s.ciou_0_5, 1.0);
  EXPECT_EQ(s.ciou_0_7, 1.0);
  EXPECT_DOUBLE_EQ(s.auc, 1.0);
  EXPECT_EQ(s.mean_iou, 1.0);
}

TEST(Evaluate, CsvIsDeterministic) {
  const auto scenes = synth::generate_dataset(5, 400, GeneratorConfig{});
  const Model model = Model::init(ModelConfig{}, 4);
  std::ostringstream a, b;
  eval::write_metrics_csv(a, eval::evaluate(model, scenes, {}));
  eval::write_metrics_csv(b, eval::evaluate(model, scenes, {}));
  EXPECT_EQ(a.str(), b.str());
  const std::string text = a.str();
  EXPECT_EQ(text.rfind("row,seed,chosen_cluster,iou,unrelated_iou,ciou@0.5,ciou@0.7,auc,match_accuracy\n", 0), 0u);
  EXPECT_NE(text.find("\nsummary,"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST(Evaluate, MetricsStayInRange) {
  const auto scenes = synth::generate_dataset(8, 500, GeneratorConfig{});
  const eval::EvalSummary s = eval::evaluate(Model::init(ModelConfig{}, 5), scenes, {});
  for (double v : {s.ciou_0_5, s.ciou_0_7, s.auc, s.match_accuracy, s.mean_iou, s.mean_unrelated_iou}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

}  // namespace
}  // namespace dmc
