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


#include "dmc/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dmc/errors.hpp"
#include "dmc/random.hpp"

namespace dmc {

void AdamConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

OptimizerState::OptimizerState(const AdamConfig& cfg, const std::vector<std::size_t>& block_sizes)
    : config(cfg) {
  config.validate();
  for (std::size_t n : block_sizes) {
    first.emplace_back(n, 0.0);
    second.emplace_back(n, 0.0);
  }
}

void optimizer_step(std::span<const ParamBlock> params,
                    std::span<const std::span<const double>> grads, OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.first.size()) {
    throw ShapeError("optimizer_step: parameter, gradient and state block counts differ");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].values.size() != grads[b].size() ||
        grads[b].size() != state.first[b].size()) {
      throw ShapeError("optimizer_step: block " + params[b].name + " shape mismatch");
    }
    for (double g : grads[b]) {
      if (!std::isfinite(g)) {
        throw TrainingDiverged("non-finite gradient in block " + params[b].name, state.step + 1);
      }
    }
  }

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    std::span<double> theta = params[b].values;
    std::vector<double>& m = state.first[b];
    std::vector<double>& v = state.second[b];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grads[b][i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  if (iterations < 1) throw ConfigError("train_iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  adam.validate();
  loss.validate();
}

namespace train {

std::vector<std::size_t> sample_indices(std::size_t dataset_size, std::size_t batch_size,
                                        std::uint64_t seed, std::size_t iteration) {
  if (dataset_size == 0) throw InvalidArgument("sample_indices: empty dataset");
  Rng rng(mix_seed(seed, 1000 + iteration));
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  if (batch_size <= dataset_size) {
    // Partial Fisher-Yates.
    std::vector<std::size_t> perm(dataset_size);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < batch_size; ++i) {
      std::swap(perm[i], perm[i + rng.index(dataset_size - i)]);
      out.push_back(perm[i]);
    }
  } else {
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(rng.index(dataset_size));
  }
  return out;
}

TrainResult train(std::span<const ScenePair> dataset, Model model, const TrainConfig& config,
                  const std::function<void(const TrainLogEntry&)>& on_iteration) {
  config.validate();
  if (dataset.size() < 2) throw ConfigError("train: dataset needs at least 2 scenes");

  std::vector<std::size_t> sizes;
  for (const auto& b : model.blocks()) sizes.push_back(b.values.size());
  OptimizerState state(config.adam, sizes);

  TrainResult result;
  result.log.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const auto indices = sample_indices(dataset.size(), config.batch_size, config.seed, it);
    const MatchBatch batch =
        synth::make_batch(dataset, indices, mix_seed(config.seed, 500000 + it));
    BatchGrads g;
    try {
      g = grad::backward(batch, model, config.loss);
    } catch (const DegenerateVectorError& e) {
      throw TrainingDiverged(std::string(e.what()) + " at iteration " + std::to_string(it),
                             static_cast<long>(it));
    } catch (const InvalidArgument& e) {
      // Inputs were validated by make_batch, so this is overflow in the parameters.
      throw TrainingDiverged(std::string(e.what()) + " at iteration " + std::to_string(it),
                             static_cast<long>(it));
    }
    if (!std::isfinite(g.result.loss)) {
      throw TrainingDiverged("non-finite loss at iteration " + std::to_string(it),
                             static_cast<long>(it));
    }
    const TrainLogEntry entry{it, g.result.loss, g.result.positive_score_mean,
                              g.result.negative_score_mean};
    result.log.push_back(entry);
    if (on_iteration) on_iteration(entry);

    const auto params = model.blocks();
    const auto grads = g.grads.blocks();
    try {
      optimizer_step(params, grads, state);
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged(e.what(), static_cast<long>(it));
    }
  }
  result.model = std::move(model);
  return result;
}

void write_log_csv(std::ostream& os, std::span<const TrainLogEntry> log) {
  os << "iter,loss,pos_score_mean,neg_score_mean\n";
  for (const TrainLogEntry& e : log) {
    fmt::print(os, "{},{:.17g},{:.17g},{:.17g}\n", e.iteration, e.loss, e.positive_score_mean,
               e.negative_score_mean);
  }
}

}  // namespace train
}  // namespace dmc
