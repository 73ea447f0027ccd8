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


#include "dmc/clustering.hpp"

#include <cmath>
#include <string>

#include "dmc/errors.hpp"

namespace dmc {

const char* to_string(Modality m) {
  return m == Modality::kAudio ? "audio" : "visual";
}

FeatureSet::FeatureSet(Matrix vectors, GridShape grid, Modality modality)
    : vectors_(std::move(vectors)), grid_(grid), modality_(modality) {
  if (vectors_.rows() == 0 || vectors_.cols() == 0) {
    throw ShapeError("FeatureSet: needs at least one vector of positive dimension");
  }
  if (grid_.count() != count()) {
    throw ShapeError("FeatureSet: grid shape " + std::to_string(grid_.rows) + "x" +
                     std::to_string(grid_.cols) + " does not cover " +
                     std::to_string(count()) + " vectors");
  }
}

ProjectionBank::ProjectionBank(std::vector<Matrix> matrices)
    : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw ShapeError("ProjectionBank: needs k >= 1 matrices");
  const auto rows = matrices_.front().rows();
  const auto cols = matrices_.front().cols();
  if (rows == 0 || cols == 0) throw ShapeError("ProjectionBank: empty projection");
  for (const auto& w : matrices_) {
    if (w.rows() != rows || w.cols() != cols) {
      throw ShapeError("ProjectionBank: projections differ in shape");
    }
    if (!w.allFinite()) throw InvalidArgument("ProjectionBank: non-finite entry");
  }
}

ProjectionBank ProjectionBank::identity(std::size_t k, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  return ProjectionBank(std::vector<Matrix>(k, Matrix::Identity(dim, dim)));
}

void ClusterConfig::validate() const {
  if (k < 1) throw ConfigError("cluster count k must be >= 1");
  if (iterations < 1) throw ConfigError("iteration count T must be >= 1");
  if (!(z > 0.0) || !std::isfinite(z)) throw ConfigError("z must be positive");
}

ClusterState ClusterTrace::final_state() const {
  ClusterState state;
  const Step& last = steps.back();
  state.distances = last.distances;
  state.assignments = last.assignments;
  state.centers = last.centers;
  state.iteration = steps.size();
  return state;
}

namespace clustering {

namespace {

void check_compatible(const FeatureSet& features, const ProjectionBank& bank) {
  if (features.dim() != bank.n()) {
    throw ShapeError("feature dimension " + std::to_string(features.dim()) +
                     " does not match projection input dimension " +
                     std::to_string(bank.n()));
  }
}

}  // namespace

ClusterState init_state(const FeatureSet& features, const ProjectionBank& bank,
                        const ClusterConfig& config) {
  config.validate();
  check_compatible(features, bank);
  if (config.k != bank.k()) throw ShapeError("config k does not match projection bank");
  const auto rows = static_cast<Eigen::Index>(features.count());
  const auto k = static_cast<Eigen::Index>(config.k);
  ClusterState state;
  state.distances = Matrix::Zero(rows, k);
  state.assignments = update_assignments(state.distances, config.z);
  return state;
}

std::vector<Matrix> project(const FeatureSet& features, const ProjectionBank& bank) {
  check_compatible(features, bank);
  std::vector<Matrix> projected;
  projected.reserve(bank.k());
  for (const auto& w : bank.matrices()) projected.push_back(features.vectors() * w.transpose());
  return projected;
}

Matrix compute_distances(const std::vector<Matrix>& projected, const Matrix& centers) {
  if (static_cast<std::size_t>(centers.cols()) != projected.size()) {
    throw ShapeError("compute_distances: center count does not match k");
  }
  const auto rows = projected.front().rows();
  Matrix d(rows, centers.cols());
  for (Eigen::Index j = 0; j < centers.cols(); ++j) {
    if (centers.rows() != projected[j].cols()) {
      throw ShapeError("compute_distances: center dimension mismatch");
    }
    const double norm = centers.col(j).norm();
    if (!(norm >= numerics::kDegenerateNorm)) {
      throw DegenerateVectorError("cluster " + std::to_string(j) + " has a degenerate center",
                                  static_cast<std::size_t>(j));
    }
    d.col(j) = -(projected[j] * centers.col(j)) / norm;
  }
  return d;
}

Matrix compute_distances(const FeatureSet& features, const ProjectionBank& bank,
                         const Matrix& centers) {
  return compute_distances(project(features, bank), centers);
}

Matrix update_assignments(const Matrix& distances, double z) {
  if (!distances.allFinite()) throw InvalidArgument("update_assignments: non-finite distance");
  if (!(z > 0.0)) throw InvalidArgument("update_assignments: z must be positive");
  Matrix s(distances.rows(), distances.cols());
  for (Eigen::Index i = 0; i < distances.rows(); ++i) {
    const double lo = distances.row(i).minCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < distances.cols(); ++j) {
      s(i, j) = std::exp(-z * (distances(i, j) - lo));
      sum += s(i, j);
    }
    s.row(i) /= sum;
  }
  return s;
}

Matrix update_centers(const std::vector<Matrix>& projected, const Matrix& assignments) {
  const auto k = static_cast<Eigen::Index>(projected.size());
  if (assignments.cols() != k || assignments.rows() != projected.front().rows()) {
    throw ShapeError("update_centers: assignment matrix shape mismatch");
  }
  const auto m = projected.front().cols();
  Matrix centers = Matrix::Zero(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Matrix& pj = projected[j];
    for (Eigen::Index i = 0; i < pj.rows(); ++i) {
      centers.col(j) += assignments(i, j) * pj.row(i).transpose();
    }
  }
  return centers;
}

Matrix update_centers(const FeatureSet& features, const ProjectionBank& bank,
                      const Matrix& assignments) {
  return update_centers(project(features, bank), assignments);
}

ClusterTrace run_traced(const FeatureSet& features, const ProjectionBank& bank,
                        const ClusterConfig& config) {
  ClusterState init = init_state(features, bank, config);
  ClusterTrace trace;
  trace.projected = project(features, bank);
  trace.steps.reserve(config.iterations);

  Matrix distances = std::move(init.distances);
  for (std::size_t r = 0; r < config.iterations; ++r) {
    ClusterTrace::Step step;
    step.assignments = update_assignments(distances, config.z);
    step.centers = update_centers(trace.projected, step.assignments);
    step.distances = compute_distances(trace.projected, step.centers);
    step.center_norms = step.centers.colwise().norm().transpose();
    step.unit_centers = step.centers;
    for (Eigen::Index j = 0; j < step.centers.cols(); ++j) {
      step.unit_centers.col(j) /= step.center_norms(j);
    }
    distances = step.distances;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

ClusterState run_clustering(const FeatureSet& features, const ProjectionBank& bank,
                            const ClusterConfig& config) {
  return run_traced(features, bank, config).final_state();
}

ObjectiveValue objective(const ClusterState& state, double z) {
  const Matrix& d = state.distances;
  if (d.size() == 0) throw InvalidArgument("objective: state has no distances");
  ObjectiveValue value;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const Vector row = d.row(i).transpose();
    value.smooth += numerics::smooth_min(numerics::as_span(row), z);
    value.hard += row.minCoeff();
  }
  return value;
}

}  // namespace clustering
}  // namespace dmc
