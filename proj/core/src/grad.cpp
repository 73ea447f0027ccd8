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


#include "dmc/grad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dmc/errors.hpp"
#include "dmc/random.hpp"

namespace dmc {

std::vector<std::span<const double>> GradientBundle::blocks() const {
  std::vector<std::span<const double>> out;
  auto add = [&out](const auto& dense) {
    out.emplace_back(dense.data(), static_cast<std::size_t>(dense.size()));
  };
  add(visual_encoder.weight);
  add(visual_encoder.bias);
  add(audio_encoder.weight);
  add(audio_encoder.bias);
  for (const auto& w : projections) add(w);
  return out;
}

namespace grad {

ClusterGrads cluster_backward(const FeatureSet& features, const ProjectionBank& bank,
                              const ClusterConfig& config, const ClusterTrace& trace,
                              const Matrix& grad_centers, const Matrix& grad_assignments,
                              const Matrix& grad_distances) {
  const std::size_t k = bank.k();
  const auto count = static_cast<Eigen::Index>(features.count());
  const auto m = static_cast<Eigen::Index>(bank.m());
  const auto kk = static_cast<Eigen::Index>(k);
  if (trace.steps.empty() || trace.projected.size() != k) {
    throw ShapeError("cluster_backward: trace does not match projection bank");
  }
  if (grad_centers.size() != 0 && (grad_centers.rows() != m || grad_centers.cols() != kk)) {
    throw ShapeError("cluster_backward: center gradient shape mismatch");
  }

  std::vector<Matrix> grad_projected(k, Matrix::Zero(count, m));
  Matrix gd = grad_distances.size() != 0 ? grad_distances : Matrix::Zero(count, kk);

  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const ClusterTrace::Step& step = trace.steps[t];
    const bool last = t + 1 == trace.steps.size();

    // d = -P_j c_j / |c_j|
    Matrix gc = (last && grad_centers.size() != 0) ? grad_centers : Matrix::Zero(m, kk);
    for (std::size_t j = 0; j < k; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const Vector unit = step.unit_centers.col(jj);
      const Vector gd_col = gd.col(jj);
      grad_projected[j].noalias() -= gd_col * unit.transpose();
      const Vector g_unit = -(trace.projected[j].transpose() * gd_col);
      gc.col(jj) += (g_unit - unit * unit.dot(g_unit)) / step.center_norms(jj);
    }

    // c_j = sum_i s_ij P_j(i, :)
    Matrix gs = (last && grad_assignments.size() != 0) ? grad_assignments : Matrix::Zero(count, kk);
    for (std::size_t j = 0; j < k; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      gs.col(jj) += trace.projected[j] * gc.col(jj);
      grad_projected[j].noalias() += step.assignments.col(jj) * gc.col(jj).transpose();
    }

    if (t == 0) break;  // the initial distances are the constant 0

    // s = softmax(-z d_prev), row-wise
    const Matrix& s = step.assignments;
    const Vector row_dot = (s.array() * gs.array()).rowwise().sum();
    Matrix ga = s.array() * (gs.colwise() - row_dot).array();
    gd = -config.z * ga;
  }

  ClusterGrads out;
  out.features = Matrix::Zero(count, static_cast<Eigen::Index>(bank.n()));
  for (std::size_t j = 0; j < k; ++j) {
    out.projections.push_back(grad_projected[j].transpose() * features.vectors());
    out.features.noalias() += grad_projected[j] * bank[j];
  }
  return out;
}

HeadForward head_forward(const FeatureSet& visual, const FeatureSet& audio,
                         const FeatureSet& negative, const ProjectionBank& bank,
                         const ClusterConfig& config, const LossConfig& loss_config) {
  HeadForward f{clustering::run_traced(visual, bank, config),
                clustering::run_traced(audio, bank, config),
                clustering::run_traced(negative, bank, config),
                {}};
  f.margin = loss::margin_breakdown(f.audio.steps.back().centers, f.visual.steps.back().centers,
                                    f.negative.steps.back().centers, loss_config);
  return f;
}

HeadGrads head_backward(const FeatureSet& visual, const FeatureSet& audio,
                        const FeatureSet& negative, const ProjectionBank& bank,
                        const ClusterConfig& config, const LossConfig& loss_config,
                        const HeadOptions& options) {
  const HeadForward f = head_forward(visual, audio, negative, bank, config, loss_config);
  const Matrix& cv = f.visual.steps.back().centers;
  const Matrix& ca = f.audio.steps.back().centers;
  const Matrix& cn = f.negative.steps.back().centers;
  const loss::CenterGrads gc = loss::margin_backward(ca, cv, cn, f.margin);

  HeadGrads out;
  out.loss = f.margin.loss;
  ClusterGrads ga = cluster_backward(audio, bank, config, f.audio, gc.positive_audio);
  ClusterGrads gn = cluster_backward(negative, bank, config, f.negative, gc.negative_audio);
  out.features.audio = std::move(ga.features);
  out.features.negative = std::move(gn.features);
  out.projections = std::move(ga.projections);
  for (std::size_t j = 0; j < bank.k(); ++j) out.projections[j] += gn.projections[j];

  if (options.detach_visual) {
    out.features.visual = Matrix::Zero(visual.vectors().rows(), visual.vectors().cols());
  } else {
    ClusterGrads gv = cluster_backward(visual, bank, config, f.visual, gc.visual);
    out.features.visual = std::move(gv.features);
    for (std::size_t j = 0; j < bank.k(); ++j) out.projections[j] += gv.projections[j];
  }
  return out;
}

namespace {

struct EncodedSample {
  FeatureSet visual;
  FeatureSet audio;
  FeatureSet negative;
};

EncodedSample encode_sample(const MatchBatch& batch, std::size_t b, const Model& model) {
  const ScenePair& pos = batch.positive(b);
  return {encoder::encode(pos.visual, model.visual), encoder::encode(pos.audio, model.audio),
          encoder::encode(batch.negative_audio(b), model.audio)};
}

void accumulate(BatchResult& result, const MarginBreakdown& margin) {
  result.loss += margin.loss;
  result.positive_score_mean += margin.positive_scores.mean();
  result.negative_score_mean += margin.negative_scores.mean();
  for (const HingeTerm& h : margin.hinges) {
    result.min_abs_hinge = std::min(result.min_abs_hinge, std::abs(h.argument));
    result.hinge_pattern.push_back(h.active());
  }
}

void finish(BatchResult& result, std::size_t size) {
  const double inv = 1.0 / static_cast<double>(size);
  result.loss *= inv;
  result.positive_score_mean *= inv;
  result.negative_score_mean *= inv;
}

void check_batch(const MatchBatch& batch) {
  if (batch.size() == 0) throw InvalidArgument("batch is empty");
}

}  // namespace

BatchResult evaluate_batch(const MatchBatch& batch, const Model& model,
                           const LossConfig& loss_config) {
  check_batch(batch);
  BatchResult result;
  result.min_abs_hinge = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const EncodedSample s = encode_sample(batch, b, model);
    const HeadForward f = head_forward(s.visual, s.audio, s.negative, model.bank,
                                       model.config.cluster, loss_config);
    accumulate(result, f.margin);
  }
  finish(result, batch.size());
  return result;
}

BatchGrads backward(const MatchBatch& batch, const Model& model, const LossConfig& loss_config,
                    const HeadOptions& options) {
  check_batch(batch);
  BatchGrads out;
  BatchResult& result = out.result;
  result.min_abs_hinge = std::numeric_limits<double>::infinity();
  GradientBundle& g = out.grads;
  g.visual_encoder = {Matrix::Zero(model.visual.weight.rows(), model.visual.weight.cols()),
                      Vector::Zero(model.visual.bias.size())};
  g.audio_encoder = {Matrix::Zero(model.audio.weight.rows(), model.audio.weight.cols()),
                     Vector::Zero(model.audio.bias.size())};
  for (const Matrix& w : model.bank.matrices()) g.projections.push_back(Matrix::Zero(w.rows(), w.cols()));

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const EncodedSample s = encode_sample(batch, b, model);
    const HeadForward f = head_forward(s.visual, s.audio, s.negative, model.bank,
                                       model.config.cluster, loss_config);
    accumulate(result, f.margin);
    HeadGrads h = head_backward(s.visual, s.audio, s.negative, model.bank, model.config.cluster,
                                loss_config, options);
    h.features.visual *= inv;
    h.features.audio *= inv;
    h.features.negative *= inv;

    const ScenePair& pos = batch.positive(b);
    const EncoderGrads gv = encoder::encoder_backward(h.features.visual, model.visual, pos.visual);
    const EncoderGrads ga = encoder::encoder_backward(h.features.audio, model.audio, pos.audio);
    const EncoderGrads gn =
        encoder::encoder_backward(h.features.negative, model.audio, batch.negative_audio(b));
    g.visual_encoder.weight += gv.weight;
    g.visual_encoder.bias += gv.bias;
    g.audio_encoder.weight += ga.weight + gn.weight;
    g.audio_encoder.bias += ga.bias + gn.bias;
    for (std::size_t j = 0; j < model.bank.k(); ++j) g.projections[j] += inv * h.projections[j];
    g.features.push_back(std::move(h.features));
  }
  finish(result, batch.size());
  return out;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

BlockError check_block(const std::string& name, std::span<double> theta,
                       std::span<const double> analytic, const std::function<double()>& loss,
                       const GradCheckOptions& options, std::uint64_t stream) {
  if (theta.size() != analytic.size()) throw ShapeError("check_block: gradient size mismatch");
  if (!(options.step > 0.0)) throw InvalidArgument("check_block: step must be positive");

  std::vector<std::size_t> coords(theta.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (coords.size() > options.coords_per_block) {
    Rng rng(mix_seed(options.seed, stream));
    for (std::size_t i = 0; i < options.coords_per_block; ++i) {
      std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
    }
    coords.resize(options.coords_per_block);
  }

  BlockError out{name, 0.0, coords.size()};
  for (std::size_t c : coords) {
    const double saved = theta[c];
    theta[c] = saved + options.step;
    const double up = loss();
    theta[c] = saved - options.step;
    const double down = loss();
    theta[c] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double a = analytic[c] + options.corrupt_analytic;
    out.rel_error = std::max(out.rel_error, relative_error(a, numeric));
  }
  return out;
}

GradCheckReport grad_check(const Model& model, const MatchBatch& batch,
                           const LossConfig& loss_config, const GradCheckOptions& options) {
  const BatchGrads base = backward(batch, model, loss_config);
  if (base.result.min_abs_hinge < options.kink_guard) {
    throw ResampleRequired("a hinge sits on its kink at the evaluation point");
  }
  GradCheckReport report;
  report.step = options.step;

  Model probe = model;
  auto batch_loss = [&]() {
    const BatchResult r = evaluate_batch(batch, probe, loss_config);
    if (r.hinge_pattern != base.result.hinge_pattern) {
      throw ResampleRequired("perturbation crossed a hinge kink");
    }
    return r.loss;
  };
  const auto analytic = base.grads.blocks();
  auto params = probe.blocks();
  for (std::size_t i = 0; i < params.size(); ++i) {
    report.blocks.push_back(
        check_block(params[i].name, params[i].values, analytic[i], batch_loss, options, i));
  }

  // Feature leaves of the first sample, with the encoders bypassed.
  const ScenePair& pos = batch.positive(0);
  const FeatureSet fv = encoder::encode(pos.visual, model.visual);
  const FeatureSet fa = encoder::encode(pos.audio, model.audio);
  const FeatureSet fn = encoder::encode(batch.negative_audio(0), model.audio);
  const HeadGrads head = head_backward(fv, fa, fn, model.bank, model.config.cluster, loss_config);
  const HeadForward head_base = head_forward(fv, fa, fn, model.bank, model.config.cluster, loss_config);

  Matrix uv = fv.vectors();
  Matrix ua = fa.vectors();
  Matrix un = fn.vectors();
  auto head_loss = [&]() {
    const HeadForward f = head_forward(FeatureSet(uv, fv.grid(), fv.modality()),
                                       FeatureSet(ua, fa.grid(), fa.modality()),
                                       FeatureSet(un, fn.grid(), fn.modality()), model.bank,
                                       model.config.cluster, loss_config);
    for (std::size_t h = 0; h < f.margin.hinges.size(); ++h) {
      if (f.margin.hinges[h].active() != head_base.margin.hinges[h].active()) {
        throw ResampleRequired("perturbation crossed a hinge kink");
      }
    }
    return f.margin.loss;
  };
  auto as_span = [](auto& dense) {
    return std::span<double>(dense.data(), static_cast<std::size_t>(dense.size()));
  };
  auto as_cspan = [](const auto& dense) {
    return std::span<const double>(dense.data(), static_cast<std::size_t>(dense.size()));
  };
  const std::size_t base_stream = params.size();
  report.blocks.push_back(check_block("features.visual", as_span(uv), as_cspan(head.features.visual),
                                      head_loss, options, base_stream));
  report.blocks.push_back(check_block("features.audio", as_span(ua), as_cspan(head.features.audio),
                                      head_loss, options, base_stream + 1));
  report.blocks.push_back(check_block("features.negative", as_span(un),
                                      as_cspan(head.features.negative), head_loss, options,
                                      base_stream + 2));

  for (const BlockError& b : report.blocks) {
    report.max_rel_error = std::max(report.max_rel_error, b.rel_error);
  }
  return report;
}

}  // namespace grad
}  // namespace dmc
