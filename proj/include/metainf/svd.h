/* Copyright 2026 The MetaInf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "metainf/domain.h"

namespace metainf {

// Truncated SVD of mean-centered row vectors.
struct SvdModel {
  Eigen::MatrixXd right_factors;   // raw_dim x rank, orthonormal columns
  Eigen::VectorXd singular_values;  // rank, non-increasing
  Eigen::VectorXd mean_vector;      // raw_dim

  int rank() const { return static_cast<int>(singular_values.size()); }
  int raw_dim() const { return static_cast<int>(mean_vector.size()); }
};

// Fits on the rows of `rows` (count x raw_dim). Requires count >= 2 and
// 1 <= k <= min(count, raw_dim), else UsageError. Uses one-sided Jacobi
// rotations on the centered matrix (or its transpose when count < raw_dim).
// Directions with zero singular value are completed to an orthonormal set.
SvdModel FitSvd(const Eigen::MatrixXd& rows, int k);
SvdModel FitSvd(const std::vector<EmbeddingVector>& raw, int k);

// (raw - mean) projected on the right factors; DataError on dim mismatch.
EmbeddingVector Reduce(const SvdModel& model, const EmbeddingVector& raw);
Eigen::VectorXd Reduce(const SvdModel& model, const Eigen::VectorXd& raw);

// mean + V * reduced.
Eigen::VectorXd Reconstruct(const SvdModel& model,
                            const Eigen::VectorXd& reduced);

}  // namespace metainf
