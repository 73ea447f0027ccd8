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


#include "dmc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmc/errors.hpp"

namespace dmc::numerics {

namespace {

void check_sequence(std::span<const double> values, const char* what) {
  if (values.empty()) {
    throw InvalidArgument(std::string(what) + ": empty sequence");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + ": non-finite input");
    }
  }
}

void check_magnitude(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw InvalidArgument("smoothing magnitude z must be a positive finite number");
  }
}

}  // namespace

SmoothingConfig::SmoothingConfig(double magnitude) : z(magnitude) {
  check_magnitude(z);
}

double log_sum_exp(std::span<const double> values) {
  check_sequence(values, "log_sum_exp");
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

// Both surrogates factor the extreme value out before exponentiating, so
// |z * value| may reach ~700 without overflow. The extreme term contributes
// exp(0) = 1 exactly, which makes the singleton case exact.
double smooth_max(std::span<const double> values, double z) {
  check_sequence(values, "smooth_max");
  check_magnitude(z);
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(z * (v - m));
  return m + std::log(sum) / z;
}

double smooth_min(std::span<const double> values, double z) {
  check_sequence(values, "smooth_min");
  check_magnitude(z);
  const double m = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(-z * (v - m));
  return m - std::log(sum) / z;
}

void softmax_into(std::span<const double> values, std::span<double> out) {
  check_sequence(values, "softmax");
  if (out.size() != values.size()) throw ShapeError("softmax: output length mismatch");
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

std::vector<double> softmax(std::span<const double> values) {
  std::vector<double> out(values.size());
  softmax_into(values, out);
  return out;
}

double cosine_similarity(const Eigen::Ref<const Vector>& a,
                         const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na >= kDegenerateNorm) || !(nb >= kDegenerateNorm)) {
    throw DegenerateVectorError("cosine_similarity: degenerate vector norm");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Vector l2_normalize(const Eigen::Ref<const Vector>& v) {
  const double n = v.norm();
  if (!(n >= kDegenerateNorm)) {
    throw DegenerateVectorError("l2_normalize: degenerate vector norm");
  }
  return v / n;
}

}  // namespace dmc::numerics
