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

#include "metainf/svd.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "metainf/error.h"

namespace metainf {

namespace {

constexpr int kMaxSweeps = 80;

// Hestenes one-sided Jacobi: rotates column pairs of `work` until all are
// mutually orthogonal, accumulating the rotations into `rotations`.
// Afterwards work = input * rotations and work's column norms are the
// singular values of the input.
void OrthogonalizeColumns(Eigen::MatrixXd& work, Eigen::MatrixXd& rotations) {
  const Eigen::Index q = work.cols();
  rotations = Eigen::MatrixXd::Identity(q, q);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < q; ++i) {
      for (Eigen::Index j = i + 1; j < q; ++j) {
        double alpha = work.col(i).squaredNorm();
        double beta = work.col(j).squaredNorm();
        double gamma = work.col(i).dot(work.col(j));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        Eigen::VectorXd wi = work.col(i);
        work.col(i) = c * wi - s * work.col(j);
        work.col(j) = s * wi + c * work.col(j);
        Eigen::VectorXd vi = rotations.col(i);
        rotations.col(i) = c * vi - s * rotations.col(j);
        rotations.col(j) = s * vi + c * rotations.col(j);
      }
    }
    if (!rotated) return;
  }
}

// Orthonormalizes the first `have` columns in place (modified Gram-Schmidt,
// two passes) and fills the remaining columns with unit vectors orthogonal
// to everything before them, drawn from the standard basis.
void CompleteOrthonormal(Eigen::MatrixXd& basis, Eigen::Index have) {
  const Eigen::Index dim = basis.rows();
  for (Eigen::Index c = 0; c < have; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index p = 0; p < c; ++p) {
        basis.col(c) -= basis.col(p).dot(basis.col(c)) * basis.col(p);
      }
    }
    basis.col(c).normalize();
  }
  Eigen::Index next_axis = 0;
  for (Eigen::Index c = have; c < basis.cols(); ++c) {
    // Pick the standard axis with the largest residual; keeps it stable.
    double best = -1.0;
    Eigen::VectorXd best_vec;
    for (Eigen::Index axis = next_axis; axis < dim; ++axis) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, axis);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index p = 0; p < c; ++p) {
          v -= basis.col(p).dot(v) * basis.col(p);
        }
      }
      double n = v.norm();
      if (n > best) {
        best = n;
        best_vec = v;
      }
      if (n > 0.5) break;  // good enough, and deterministic
    }
    basis.col(c) = best_vec / best;
    ++next_axis;
  }
}

}  // namespace

SvdModel FitSvd(const Eigen::MatrixXd& rows, int k) {
  const Eigen::Index count = rows.rows();
  const Eigen::Index dim = rows.cols();
  if (count < 2) throw UsageError("SVD fit needs at least 2 vectors");
  if (dim < 1) throw UsageError("SVD fit needs raw_dim >= 1");
  if (k < 1 || k > std::min(count, dim)) {
    throw UsageError("SVD rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(std::min(count, dim)) + "]");
  }
  if (!rows.allFinite()) throw DataError("SVD input has non-finite entries");

  SvdModel model;
  model.mean_vector = rows.colwise().mean().transpose();
  Eigen::MatrixXd centered = rows.rowwise() - model.mean_vector.transpose();

  // Work on whichever orientation has fewer columns.
  const bool tall = count >= dim;
  Eigen::MatrixXd work = tall ? centered : Eigen::MatrixXd(centered.transpose());
  Eigen::MatrixXd rotations;
  OrthogonalizeColumns(work, rotations);

  const Eigen::Index q = work.cols();
  Eigen::VectorXd sigma(q);
  for (Eigen::Index i = 0; i < q; ++i) sigma(i) = work.col(i).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return sigma(a) > sigma(b);
  });

  const double sigma_max = q > 0 ? sigma(order.front()) : 0.0;
  const double zero_tol = sigma_max * std::numeric_limits<double>::epsilon() *
                          static_cast<double>(std::max(count, dim)) * 4.0;

  model.singular_values.resize(k);
  model.right_factors.resize(dim, k);
  Eigen::Index nonzero = 0;
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index src = order[static_cast<std::size_t>(c)];
    double s = sigma(src);
    if (s <= zero_tol) s = 0.0;
    model.singular_values(c) = s;
    if (s == 0.0) continue;
    // Right singular vectors: rotation columns (tall) or normalized columns
    // of the rotated transpose (wide).
    model.right_factors.col(c) =
        tall ? Eigen::VectorXd(rotations.col(src))
             : Eigen::VectorXd(work.col(src) / sigma(src));
    ++nonzero;
  }
  CompleteOrthonormal(model.right_factors, nonzero);
  return model;
}

SvdModel FitSvd(const std::vector<EmbeddingVector>& raw, int k) {
  if (raw.size() < 2) throw UsageError("SVD fit needs at least 2 vectors");
  const std::size_t dim = raw.front().dim();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(raw.size()),
                       static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (raw[r].dim() != dim) {
      throw DataError("SVD input vectors have differing dimensions");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          raw[r].values[c];
    }
  }
  return FitSvd(rows, k);
}

Eigen::VectorXd Reduce(const SvdModel& model, const Eigen::VectorXd& raw) {
  if (raw.size() != model.raw_dim()) {
    throw DataError("reduce: vector dim " + std::to_string(raw.size()) +
                    " != model raw_dim " + std::to_string(model.raw_dim()));
  }
  return model.right_factors.transpose() * (raw - model.mean_vector);
}

EmbeddingVector Reduce(const SvdModel& model, const EmbeddingVector& raw) {
  Eigen::Map<const Eigen::VectorXd> v(raw.values.data(),
                                      static_cast<Eigen::Index>(raw.dim()));
  Eigen::VectorXd z = Reduce(model, Eigen::VectorXd(v));
  return EmbeddingVector{std::vector<double>(z.data(), z.data() + z.size()),
                         raw.provenance, raw.entity_kind};
}

Eigen::VectorXd Reconstruct(const SvdModel& model,
                            const Eigen::VectorXd& reduced) {
  if (reduced.size() != model.rank()) {
    throw DataError("reconstruct: reduced dim mismatch");
  }
  return model.mean_vector + model.right_factors * reduced;
}

}  // namespace metainf
