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

enum class Modality { kAudio, kVisual };

const char* to_string(Modality m);

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t count() const { return rows * cols; }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Feature vectors u_i of one modality, one per row, laid out row-major over
/// the patch grid they were extracted from.
class FeatureSet {
 public:
  FeatureSet(Matrix vectors, GridShape grid, Modality modality);

  const Matrix& vectors() const { return vectors_; }
  std::size_t count() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  GridShape grid() const { return grid_; }
  Modality modality() const { return modality_; }

 private:
  Matrix vectors_;
  GridShape grid_;
  Modality modality_;
};

/// The k center-specific projections W_j (each m x n), shared by both
/// modalities.
class ProjectionBank {
 public:
  explicit ProjectionBank(std::vector<Matrix> matrices);

  std::size_t k() const { return matrices_.size(); }
  std::size_t m() const { return static_cast<std::size_t>(matrices_.front().rows()); }
  std::size_t n() const { return static_cast<std::size_t>(matrices_.front().cols()); }

  const Matrix& operator[](std::size_t j) const { return matrices_[j]; }
  Matrix& operator[](std::size_t j) { return matrices_[j]; }
  const std::vector<Matrix>& matrices() const { return matrices_; }
  std::vector<Matrix>& matrices() { return matrices_; }

  /// Square identity projections (m = n).
  static ProjectionBank identity(std::size_t k, std::size_t n);

 private:
  std::vector<Matrix> matrices_;
};

struct ClusterConfig {
  std::size_t k = 2;
  std::size_t iterations = 3;
  double z = 1.0;

  void validate() const;
};

/// Result of the alternating assignment / center updates.
///
/// `distances` and `assignments` are count x k; `centers` is m x k with
/// column j holding c_j. Before the first center update `centers` is empty.
struct ClusterState {
  Matrix distances;
  Matrix assignments;
  Matrix centers;
  std::size_t iteration = 0;
};

struct ObjectiveValue {
  double smooth = 0.0;  ///< -(1/z) sum_i log sum_j exp(-z d_ij)
  double hard = 0.0;    ///< sum_i min_j d_ij
};

/// Per-iteration intermediates kept for reverse-mode differentiation.
struct ClusterTrace {
  struct Step {
    Matrix assignments;  // s^(t), count x k
    Matrix centers;      // c^(t), m x k
    Vector center_norms;
    Matrix unit_centers;  // c^(t) / |c^(t)|
    Matrix distances;     // d^(t)
  };

  std::vector<Matrix> projected;  // projected[j] = U W_j^T, count x m
  std::vector<Step> steps;

  ClusterState final_state() const;
};

namespace clustering {

/// d = 0, uniform assignments, no centers yet.
ClusterState init_state(const FeatureSet& features, const ProjectionBank& bank,
                        const ClusterConfig& config);

/// projected[j] = U W_j^T (row i holds W_j u_i).
std::vector<Matrix> project(const FeatureSet& features, const ProjectionBank& bank);

/// d_ij = -<W_j u_i, c_j / |c_j|>. Throws DegenerateVectorError naming j when
/// |c_j| falls below the guard.
Matrix compute_distances(const FeatureSet& features, const ProjectionBank& bank,
                         const Matrix& centers);
Matrix compute_distances(const std::vector<Matrix>& projected, const Matrix& centers);

/// Row-wise softmax of -z d.
Matrix update_assignments(const Matrix& distances, double z);

/// c_j = sum_i s_ij W_j u_i, accumulated in ascending feature order.
Matrix update_centers(const FeatureSet& features, const ProjectionBank& bank,
                      const Matrix& assignments);
Matrix update_centers(const std::vector<Matrix>& projected, const Matrix& assignments);

ClusterTrace run_traced(const FeatureSet& features, const ProjectionBank& bank,
                        const ClusterConfig& config);

ClusterState run_clustering(const FeatureSet& features, const ProjectionBank& bank,
                            const ClusterConfig& config);

ObjectiveValue objective(const ClusterState& state, double z);

}  // namespace clustering
}  // namespace dmc
