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
#include <stdexcept>
#include <string>

namespace dmc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition on a value was violated (empty input, non-finite entry, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Dimensions of two objects do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Configuration (generator, run config, file header) is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable, truncated, or carrying an unknown format version.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A vector whose norm fell below the degeneracy guard had to be normalized.
class DegenerateVectorError : public Error {
 public:
  static constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

  explicit DegenerateVectorError(const std::string& what,
                                 std::size_t index = kNoIndex)
      : Error(what), index_(index) {}

  /// Cluster (or vector) index that collapsed, kNoIndex when not applicable.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Loss or gradient became non-finite during training.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Finite differences were requested at a point where a hinge sits on its kink.
class ResampleRequired : public Error {
 public:
  using Error::Error;
};

}  // namespace dmc
