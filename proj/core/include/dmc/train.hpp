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
#include <vector>

#include "dmc/grad.hpp"
#include "dmc/loss.hpp"
#include "dmc/model.hpp"
#include "dmc/synth.hpp"

namespace dmc {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Adaptive-moment accumulators, one per parameter block.
struct OptimizerState {
  AdamConfig config;
  long step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;

  OptimizerState() = default;
  OptimizerState(const AdamConfig& cfg, const std::vector<std::size_t>& block_sizes);
};

/// One bias-corrected Adam update. Throws TrainingDiverged on a non-finite
/// gradient, leaving parameters and state untouched.
void optimizer_step(std::span<const ParamBlock> params,
                    std::span<const std::span<const double>> grads, OptimizerState& state);

struct TrainConfig {
  std::size_t iterations = 3000;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  AdamConfig adam;
  LossConfig loss;

  void validate() const;
};

struct TrainLogEntry {
  std::size_t iteration = 0;
  double loss = 0.0;
  double positive_score_mean = 0.0;
  double negative_score_mean = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<TrainLogEntry> log;
};

namespace train {

/// Batch positives for one iteration: distinct indices, uniform over the dataset.
std::vector<std::size_t> sample_indices(std::size_t dataset_size, std::size_t batch_size,
                                        std::uint64_t seed, std::size_t iteration);

/// make_batch -> encode -> cluster -> margin loss -> backward -> Adam, repeated.
/// Throws TrainingDiverged carrying the iteration index on a non-finite loss.
TrainResult train(std::span<const ScenePair> dataset, Model model, const TrainConfig& config,
                  const std::function<void(const TrainLogEntry&)>& on_iteration = {});

/// `iter,loss,pos_score_mean,neg_score_mean` with a header row.
void write_log_csv(std::ostream& os, std::span<const TrainLogEntry> log);

}  // namespace train
}  // namespace dmc
