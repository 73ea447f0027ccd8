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
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dmc/errors.hpp"
#include "dmc/grad.hpp"
#include "dmc/loss.hpp"
#include "dmc/random.hpp"
#include "dmc/train.hpp"
#include "tiny.hpp"

namespace dmc {
namespace {

Matrix random_centers(Rng& rng, Eigen::Index m, Eigen::Index k) {
  Matrix c(m, k);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.uniform(-1.0, 1.0);
  return c;
}

double scalar_cos(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    dot += a(r, i) * b(r, j);
    na += a(r, i) * a(r, i);
    nb += b(r, j) * b(r, j);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

TEST(CenterScores, IdenticalAndOpposite) {
  Rng rng(1);
  const Matrix c = random_centers(rng, 5, 3);
  const Vector same = loss::center_scores(c, c);
  const Vector opposite = loss::center_scores(c, -c);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(same(i), 1.0, 1e-15);
    EXPECT_NEAR(opposite(i), -1.0, 1e-15);
  }
}

TEST(CenterScores, MatchesScalarOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_centers(rng, 4, 3), v = random_centers(rng, 4, 3);
    const Vector s = loss::center_scores(a, v);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(s(i), scalar_cos(a, i, v, i), 1e-14);
  }
}

TEST(CenterScores, DegenerateAndShapeErrors) {
  Matrix a = Matrix::Ones(3, 2);
  Matrix v = Matrix::Ones(3, 2);
  v.col(1).setZero();
  EXPECT_THROW(loss::center_scores(a, v), DegenerateVectorError);
  EXPECT_THROW(loss::center_scores(a, Matrix::Ones(3, 3)), ShapeError);
}

TEST(MarginLoss, InactiveHingesGiveZero) {
  Rng rng(3);
  const Matrix v = random_centers(rng, 4, 2);
  EXPECT_EQ(loss::margin_loss(v, v, -v, LossConfig{}), 0.0);
}

TEST(MarginLoss, CoincidingScoresGiveKTimesMargin) {
  Rng rng(4);
  for (Eigen::Index k : {1, 2, 5}) {
    const Matrix a = random_centers(rng, 6, k), v = random_centers(rng, 6, k);
    EXPECT_NEAR(loss::margin_loss(a, v, a, LossConfig{}), 0.5 * static_cast<double>(k), 1e-15);
  }
  const Matrix a = random_centers(rng, 3, 2), v = random_centers(rng, 3, 2);
  EXPECT_EQ(loss::margin_loss(a, v, a, LossConfig{}), 1.0);
}

TEST(MarginLoss, MatchesScalarOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(4));
    const Matrix a = random_centers(rng, 5, k), v = random_centers(rng, 5, k),
                 n = random_centers(rng, 5, k);
    const double margin = rng.uniform(0.1, 1.0);
    double same = 0.0, all = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double pos = scalar_cos(a, i, v, i);
      same += std::max(0.0, scalar_cos(n, i, v, i) - pos + margin);
      for (Eigen::Index j = 0; j < k; ++j)
        if (j != i) all += std::max(0.0, scalar_cos(n, j, v, i) - pos + margin);
    }
    EXPECT_NEAR(loss::margin_loss(a, v, n, {margin, PairingRule::kSameIndex}), same, 1e-13);
    EXPECT_NEAR(loss::margin_loss(a, v, n, {margin, PairingRule::kAllPairs}), all, 1e-13);
  }
}

TEST(MarginLoss, NonNegativeAndZeroOnlyWithMarginSeparation) {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix a = random_centers(rng, 3, 2), v = random_centers(rng, 3, 2),
                 n = random_centers(rng, 3, 2);
    const MarginBreakdown b = loss::margin_breakdown(a, v, n, LossConfig{});
    EXPECT_GE(b.loss, 0.0);
    const bool separated = (b.positive_scores - b.negative_scores).minCoeff() >= 0.5;
    EXPECT_EQ(b.loss == 0.0, separated);
  }
}

TEST(MarginLoss, InvariantToPositiveRescaling) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a = random_centers(rng, 4, 3), v = random_centers(rng, 4, 3), n = random_centers(rng, 4, 3);
    const double before = loss::margin_loss(a, v, n, LossConfig{});
    const auto col = static_cast<Eigen::Index>(rng.index(3));
    const double lambda = std::exp(rng.uniform(-5.0, 5.0));
    switch (rng.index(3)) {
      case 0: a.col(col) *= lambda; break;
      case 1: v.col(col) *= lambda; break;
      default: n.col(col) *= lambda; break;
    }
    EXPECT_NEAR(loss::margin_loss(a, v, n, LossConfig{}), before, 1e-12);
  }
}

TEST(MarginLoss, ConfigAndShapeValidation) {
  EXPECT_THROW((LossConfig{0.0, PairingRule::kSameIndex}.validate()), ConfigError);
  EXPECT_THROW((LossConfig{-1.0, PairingRule::kSameIndex}.validate()), ConfigError);
  const Matrix a = Matrix::Ones(3, 2);
  EXPECT_THROW(loss::margin_loss(a, a, Matrix::Ones(3, 3), LossConfig{}), ShapeError);
}

TEST(MarginBackward, MatchesCentralDifferences) {
  Rng rng(8);
  for (PairingRule rule : {PairingRule::kSameIndex, PairingRule::kAllPairs}) {
    for (int trial = 0; trial < 20; ++trial) {
      Matrix a = random_centers(rng, 4, 3), v = random_centers(rng, 4, 3), n = random_centers(rng, 4, 3);
      const LossConfig cfg{0.5, rule};
      const MarginBreakdown fwd = loss::margin_breakdown(a, v, n, cfg);
      const loss::CenterGrads g = loss::margin_backward(a, v, n, fwd);
      const double h = 1e-6;
      auto check = [&](Matrix& x, const Matrix& gx) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double keep = x(i);
          x(i) = keep + h;
          const double up = loss::margin_loss(a, v, n, cfg);
          x(i) = keep - h;
          const double down = loss::margin_loss(a, v, n, cfg);
          x(i) = keep;
          EXPECT_NEAR(gx(i), (up - down) / (2 * h), 1e-6);
        }
      };
      bool near_kink = false;
      for (const HingeTerm& t : fwd.hinges) near_kink |= std::abs(t.argument) < 1e-3;
      if (near_kink) continue;
      check(a, g.positive_audio);
      check(v, g.visual);
      check(n, g.negative_audio);
    }
  }
}

TEST(Adam, FirstStepFromZeroState) {
  std::vector<double> theta{0.5, -1.0, 2.0};
  const std::vector<double> g{0.3, -2.0, 1e-3};
  OptimizerState state(AdamConfig{1e-4, 0.9, 0.999, 1e-8}, {3});
  const std::vector<ParamBlock> params{{"x", theta}};
  const std::vector<std::span<const double>> grads{g};
  optimizer_step(params, grads, state);
  const std::vector<double> start{0.5, -1.0, 2.0};
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(theta[i], start[i] - 1e-4 * g[i] / (std::abs(g[i]) + 1e-8), 1e-15);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  std::vector<double> theta{1.0, 2.0};
  OptimizerState state(AdamConfig{}, {2});
  state.step = 4;
  state.first[0] = {0.0, 0.0};
  state.second[0] = {0.0, 0.0};
  const std::vector<double> zero{0.0, 0.0};
  const std::vector<ParamBlock> params{{"x", theta}};
  const std::vector<std::span<const double>> grads{zero};
  optimizer_step(params, grads, state);
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(state.step, 5);

  state.first[0] = {1.0, -1.0};
  state.second[0] = {4.0, 4.0};
  std::vector<double> moved = theta;
  const std::vector<ParamBlock> params2{{"x", moved}};
  optimizer_step(params2, grads, state);
  EXPECT_DOUBLE_EQ(state.first[0][0], 0.9);
  EXPECT_DOUBLE_EQ(state.second[0][1], 4.0 * 0.999);
}

TEST(Adam, QuadraticBowlConverges) {
  std::vector<double> theta{3.0, -2.0, 0.5};
  const std::vector<double> scale{1.0, 4.0, 0.25};
  auto value = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += scale[i] * theta[i] * theta[i];
    return s;
  };
  const double initial = value();
  OptimizerState state(AdamConfig{0.05, 0.9, 0.999, 1e-8}, {3});
  std::vector<double> g(3);
  const std::vector<ParamBlock> params{{"x", theta}};
  const std::vector<std::span<const double>> grads{g};
  for (int step = 0; step < 500; ++step) {
    for (std::size_t i = 0; i < 3; ++i) g[i] = 2.0 * scale[i] * theta[i];
    optimizer_step(params, grads, state);
  }
  EXPECT_LT(value(), 1e-3 * initial);
}

TEST(Adam, NonFiniteGradientThrowsAndLeavesState) {
  std::vector<double> theta{1.0, 2.0};
  OptimizerState state(AdamConfig{}, {2});
  const std::vector<double> bad{0.1, std::numeric_limits<double>::quiet_NaN()};
  const std::vector<ParamBlock> params{{"x", theta}};
  const std::vector<std::span<const double>> grads{bad};
  EXPECT_THROW(optimizer_step(params, grads, state), TrainingDiverged);
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(state.step, 0);
  EXPECT_EQ(state.first[0], (std::vector<double>{0.0, 0.0}));
}

TEST(Adam, ShapeMismatchAndConfigErrors) {
  std::vector<double> theta{1.0, 2.0};
  OptimizerState state(AdamConfig{1e-4, 0.9, 0.999, 1e-8}, {3});
  const std::vector<double> g{0.1, 0.2};
  const std::vector<ParamBlock> params{{"x", theta}};
  const std::vector<std::span<const double>> grads{g};
  EXPECT_THROW(optimizer_step(params, grads, state), ShapeError);
  EXPECT_THROW((AdamConfig{-1.0, 0.9, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{1e-4, 1.0, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{1e-4, 0.9, 0.999, 0.0}.validate()), ConfigError);
  EXPECT_NO_THROW((AdamConfig{0.0, 0.9, 0.999, 1e-8}.validate()));
}

TEST(SampleIndices, DistinctInRangeAndDeterministic) {
  for (std::size_t it = 0; it < 20; ++it) {
    auto a = train::sample_indices(50, 16, 3, it);
    ASSERT_EQ(a.size(), 16u);
    EXPECT_EQ(a, train::sample_indices(50, 16, 3, it));
    std::sort(a.begin(), a.end());
    EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
    EXPECT_LT(a.back(), 50u);
  }
  EXPECT_NE(train::sample_indices(50, 16, 3, 0), train::sample_indices(50, 16, 3, 1));
  const auto over = train::sample_indices(5, 16, 3, 0);
  EXPECT_EQ(over.size(), 16u);
  for (std::size_t i : over) EXPECT_LT(i, 5u);
}

TrainConfig tiny_train(std::size_t iterations) {
  TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.batch_size = 4;
  cfg.seed = 9;
  return cfg;
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  const testing::TinyShape shape;
  const auto data = testing::tiny_scenes(shape, 8, 10);
  const Model init = testing::tiny_model(shape, 10);
  TrainConfig cfg = tiny_train(5);
  cfg.adam.learning_rate = 0.0;
  const TrainResult r = train::train(data, init, cfg);
  const auto before = init.blocks();
  const auto after = r.model.blocks();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t b = 0; b < before.size(); ++b)
    EXPECT_TRUE(std::equal(before[b].values.begin(), before[b].values.end(), after[b].values.begin()));
  ASSERT_EQ(r.log.size(), 5u);
  // The trace is the initial model scored on each iteration's batch.
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    EXPECT_EQ(r.log[i].iteration, i);
    const auto idx = train::sample_indices(data.size(), cfg.batch_size, cfg.seed, i);
    const MatchBatch batch = synth::make_batch(data, idx, mix_seed(cfg.seed, 500000 + i));
    EXPECT_EQ(r.log[i].loss, grad::evaluate_batch(batch, init, cfg.loss).loss);
  }
}

TEST(Train, LogsAreDeterministic) {
  const testing::TinyShape shape;
  const auto data = testing::tiny_scenes(shape, 8, 11);
  const Model init = testing::tiny_model(shape, 11);
  const TrainConfig cfg = tiny_train(20);
  std::ostringstream a, b;
  train::write_log_csv(a, train::train(data, init, cfg).log);
  train::write_log_csv(b, train::train(data, init, cfg).log);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("iter,loss,pos_score_mean,neg_score_mean\n", 0), 0u);
}

TEST(Train, LogMatchesBatchEvaluation) {
  const testing::TinyShape shape;
  const auto data = testing::tiny_scenes(shape, 8, 12);
  const Model init = testing::tiny_model(shape, 12);
  TrainConfig cfg = tiny_train(1);
  const TrainResult r = train::train(data, init, cfg);
  const auto idx = train::sample_indices(data.size(), cfg.batch_size, cfg.seed, 0);
  const MatchBatch batch = synth::make_batch(data, idx, mix_seed(cfg.seed, 500000));
  const BatchResult expected = grad::evaluate_batch(batch, init, cfg.loss);
  EXPECT_EQ(r.log[0].loss, expected.loss);
  EXPECT_EQ(r.log[0].positive_score_mean, expected.positive_score_mean);
  EXPECT_EQ(r.log[0].negative_score_mean, expected.negative_score_mean);
}

TEST(Train, RejectsTinyDatasetAndBadConfig) {
  const testing::TinyShape shape;
  const auto one = testing::tiny_scenes(shape, 1, 13);
  const Model init = testing::tiny_model(shape, 13);
  EXPECT_THROW(train::train(one, init, tiny_train(1)), ConfigError);
  TrainConfig zero_batch = tiny_train(1);
  zero_batch.batch_size = 0;
  EXPECT_THROW(zero_batch.validate(), ConfigError);
}

TEST(Train, DivergenceReportsIteration) {
  const testing::TinyShape shape;
  const auto data = testing::tiny_scenes(shape, 8, 14);
  Model init = testing::tiny_model(shape, 14);
  init.bank[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train::train(data, init, tiny_train(3));
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.iteration(), 0);
  }
}

// Small noiseless single-source scenes on reduced grids.
GeneratorConfig separation_generator() {
  GeneratorConfig g;
  g.visual_height = g.visual_width = 16;
  g.audio_frames = 24;
  g.audio_bins = 8;
  g.min_components = g.max_components = 1;
  g.distractor_prob = 0.0;
  g.noise = 0.0;
  g.visual_radius_max = 1;
  g.audio_span_max = 4;
  g.audio_width_max = 2;
  return g;
}

TEST(Train, SeparatesPositivesFromNegatives) {
  const GeneratorConfig gen = separation_generator();
  const auto data = synth::generate_dataset(200, 5000, gen);
  const auto held = synth::generate_dataset(64, 9000, gen);
  std::vector<std::size_t> all(held.size());
  std::iota(all.begin(), all.end(), 0);
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ModelConfig mc;
    mc.feature_dim = mc.center_dim = 16;
    const Model init = Model::init(mc, seed);
    TrainConfig cfg;
    cfg.iterations = 500;
    cfg.seed = seed;
    const TrainResult r = train::train(data, init, cfg);
    const BatchResult eval = grad::evaluate_batch(synth::make_batch(held, all, seed), r.model, cfg.loss);
    if (eval.positive_score_mean > eval.negative_score_mean) ++separated;
  }
  EXPECT_GE(separated, 9);
}

}  // namespace
}  // namespace dmc
