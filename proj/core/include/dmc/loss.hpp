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
#include <vector>

#include "dmc/numerics.hpp"

namespace dmc {

/// How negative audio centers are paired against the positive pair (c_i^a, c_i^v).
enum class PairingRule {
  kSameIndex,  ///< negative center i vs positive pair i: k hinge terms
  kAllPairs,   ///< negative center j != i vs positive pair i: k(k-1) hinge terms
};

struct LossConfig {
  double margin = 0.5;
  PairingRule pairing = PairingRule::kSameIndex;

  void validate() const;
};

/// One hinge max(0, s(neg_j, vis_i) - s(pos_i, vis_i) + margin).
struct HingeTerm {
  std::size_t positive = 0;  // i
  std::size_t negative = 0;  // j
  double argument = 0.0;     // value inside max(0, .)

  bool active() const { return argument > 0.0; }
};

struct MarginBreakdown {
  double loss = 0.0;
  Vector positive_scores;  // s(c_i^a, c_i^v)
  Vector negative_scores;  // s(neg_i, c_i^v), same-index
  std::vector<HingeTerm> hinges;
};

namespace loss {

/// Cosine proximity between same-index centers (columns of m x k matrices).
Vector center_scores(const Matrix& audio_centers, const Matrix& visual_centers);

MarginBreakdown margin_breakdown(const Matrix& positive_audio, const Matrix& visual,
                                 const Matrix& negative_audio, const LossConfig& config);

double margin_loss(const Matrix& positive_audio, const Matrix& visual,
                   const Matrix& negative_audio, const LossConfig& config);

/// Gradient of cos(a, b) with respect to a.
Vector cosine_grad(const Vector& a, const Vector& b);

struct CenterGrads {
  Matrix positive_audio;
  Matrix visual;
  Matrix negative_audio;
};

/// Subgradient of the margin loss; hinges sitting exactly on the kink get 0.
CenterGrads margin_backward(const Matrix& positive_audio, const Matrix& visual,
                            const Matrix& negative_audio, const MarginBreakdown& forward);

}  // namespace loss
}  // namespace dmc
