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

#include <span>
#include <vector>

#include <Eigen/Core>

namespace dmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace numerics {

/// Norms below this are treated as an exact zero vector.
inline constexpr double kDegenerateNorm = 1e-12;

/// Smoothing magnitude of the log-sum-exp surrogates. Must be positive.
struct SmoothingConfig {
  double z = 1.0;

  explicit SmoothingConfig(double magnitude);
};

/// log(sum_j exp(values_j)), evaluated as m + log(sum_j exp(values_j - m)).
double log_sum_exp(std::span<const double> values);

/// (1/z) log sum_j exp(z * values_j). Lies in [max, max + ln(k)/z].
double smooth_max(std::span<const double> values, double z);

/// -(1/z) log sum_j exp(-z * values_j). Lies in [min - ln(k)/z, min].
double smooth_min(std::span<const double> values, double z);

std::vector<double> softmax(std::span<const double> values);

/// Writes softmax(values) into `out` (same length). `values` and `out` may alias.
void softmax_into(std::span<const double> values, std::span<double> out);

/// Throws DegenerateVectorError if either norm is below kDegenerateNorm.
double cosine_similarity(const Eigen::Ref<const Vector>& a,
                         const Eigen::Ref<const Vector>& b);

Vector l2_normalize(const Eigen::Ref<const Vector>& v);

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace numerics
}  // namespace dmc
