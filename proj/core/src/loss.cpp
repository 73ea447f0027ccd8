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


#include "dmc/loss.hpp"

#include <cmath>

#include "dmc/errors.hpp"

namespace dmc {

void LossConfig::validate() const {
  if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be positive");
}

namespace loss {

namespace {

void check_centers(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("center sets differ in shape");
  }
}

}  // namespace

Vector center_scores(const Matrix& audio_centers, const Matrix& visual_centers) {
  check_centers(audio_centers, visual_centers);
  Vector scores(audio_centers.cols());
  for (Eigen::Index i = 0; i < audio_centers.cols(); ++i) {
    scores(i) = numerics::cosine_similarity(audio_centers.col(i), visual_centers.col(i));
  }
  return scores;
}

MarginBreakdown margin_breakdown(const Matrix& positive_audio, const Matrix& visual,
                                 const Matrix& negative_audio, const LossConfig& config) {
  config.validate();
  check_centers(positive_audio, visual);
  check_centers(negative_audio, visual);
  MarginBreakdown out;
  out.positive_scores = center_scores(positive_audio, visual);
  out.negative_scores = center_scores(negative_audio, visual);
  const auto k = static_cast<std::size_t>(visual.cols());
  for (std::size_t i = 0; i < k; ++i) {
    const double pos = out.positive_scores(static_cast<Eigen::Index>(i));
    if (config.pairing == PairingRule::kSameIndex) {
      out.hinges.push_back(
          {i, i, out.negative_scores(static_cast<Eigen::Index>(i)) - pos + config.margin});
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double neg = numerics::cosine_similarity(
          negative_audio.col(static_cast<Eigen::Index>(j)),
          visual.col(static_cast<Eigen::Index>(i)));
      out.hinges.push_back({i, j, neg - pos + config.margin});
    }
  }
  for (const HingeTerm& h : out.hinges) {
    if (h.active()) out.loss += h.argument;
  }
  return out;
}

double margin_loss(const Matrix& positive_audio, const Matrix& visual,
                   const Matrix& negative_audio, const LossConfig& config) {
  return margin_breakdown(positive_audio, visual, negative_audio, config).loss;
}

Vector cosine_grad(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  const double cos = a.dot(b) / (na * nb);
  return b / (na * nb) - cos * a / (na * na);
}

CenterGrads margin_backward(const Matrix& positive_audio, const Matrix& visual,
                            const Matrix& negative_audio, const MarginBreakdown& forward) {
  CenterGrads g{Matrix::Zero(positive_audio.rows(), positive_audio.cols()),
                Matrix::Zero(visual.rows(), visual.cols()),
                Matrix::Zero(negative_audio.rows(), negative_audio.cols())};
  for (const HingeTerm& h : forward.hinges) {
    if (!h.active()) continue;
    const auto i = static_cast<Eigen::Index>(h.positive);
    const auto j = static_cast<Eigen::Index>(h.negative);
    const Vector v = visual.col(i);
    const Vector pos = positive_audio.col(i);
    const Vector neg = negative_audio.col(j);
    // + s(neg_j, vis_i)
    g.negative_audio.col(j) += cosine_grad(neg, v);
    g.visual.col(i) += cosine_grad(v, neg);
    // - s(pos_i, vis_i)
    g.positive_audio.col(i) -= cosine_grad(pos, v);
    g.visual.col(i) -= cosine_grad(v, pos);
  }
  return g;
}

}  // namespace loss
}  // namespace dmc
