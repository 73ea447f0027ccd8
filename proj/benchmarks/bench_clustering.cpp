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


#include <benchmark/benchmark.h>

#include "dmc/clustering.hpp"
#include "dmc/grad.hpp"
#include "dmc/model.hpp"
#include "dmc/random.hpp"
#include "dmc/synth.hpp"

namespace {

using namespace dmc;

FeatureSet random_features(std::size_t count, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix u(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.uniform(-1.0, 1.0);
  return FeatureSet(u, {count, 1}, Modality::kVisual);
}

ProjectionBank random_bank(std::size_t k, std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> w;
  for (std::size_t j = 0; j < k; ++j) {
    Matrix mj(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < mj.size(); ++i) mj(i) = rng.uniform(-1.0, 1.0);
    w.push_back(mj);
  }
  return ProjectionBank(std::move(w));
}

void BM_RunClustering(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto t = static_cast<std::size_t>(state.range(1));
  const FeatureSet f = random_features(64, 32, 1);
  const ProjectionBank bank = random_bank(k, 32, 32, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clustering::run_clustering(f, bank, {k, t, 1.0}));
  }
}
BENCHMARK(BM_RunClustering)->Args({2, 3})->Args({2, 10})->Args({10, 3});

void BM_ClusterBackward(benchmark::State& state) {
  const auto t = static_cast<std::size_t>(state.range(0));
  const FeatureSet f = random_features(64, 32, 3);
  const ProjectionBank bank = random_bank(2, 32, 32, 4);
  const ClusterConfig cfg{2, t, 1.0};
  const ClusterTrace trace = clustering::run_traced(f, bank, cfg);
  const Matrix upstream = Matrix::Ones(32, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad::cluster_backward(f, bank, cfg, trace, upstream));
  }
}
BENCHMARK(BM_ClusterBackward)->Arg(3)->Arg(10);

void BM_TrainingStep(benchmark::State& state) {
  const GeneratorConfig gen;
  const auto scenes = synth::generate_dataset(32, 1, gen);
  const Model model = Model::init(ModelConfig{}, 5);
  std::vector<std::size_t> idx(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const MatchBatch batch = synth::make_batch(scenes, idx, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad::backward(batch, model, LossConfig{}));
  }
}
BENCHMARK(BM_TrainingStep)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
