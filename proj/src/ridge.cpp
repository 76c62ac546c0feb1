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

#include "metainf/ridge.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "metainf/error.h"

namespace metainf {

using nlohmann::json;

double RidgeModel::PredictTransformed(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw DataError("feature vector has " + std::to_string(x.size()) +
                    " entries, ridge model expects " +
                    std::to_string(weights.size()));
  }
  double y = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) y += weights[i] * x[i];
  return y;
}

double RidgeModel::Predict(std::span<const double> x) const {
  double t = PredictTransformed(x);
  double y = target_transform == TargetTransform::kLog ? std::exp(t) : t;
  if (std::isnan(y)) y = kMinPredictedRuntime;
  return std::clamp(y, kMinPredictedRuntime, std::numeric_limits<double>::max());
}

double RidgeModel::Predict(const FeatureVector& x) const {
  if (!(x.layout == layout)) {
    throw DataError("feature layout does not match the ridge model layout");
  }
  return Predict(std::span<const double>(x.values));
}

json RidgeModel::ToJson() const {
  return {{"format", "metainf.ridge"},
          {"version", 1},
          {"weights", weights},
          {"intercept", intercept},
          {"lambda", lambda},
          {"target_transform", ToString(target_transform)},
          {"layout", layout.ToJson()}};
}

RidgeModel RidgeModel::FromJson(const json& j) {
  if (j.value("format", "") != "metainf.ridge" || j.value("version", -1) != 1) {
    throw DataError("not a ridge model or unsupported version");
  }
  RidgeModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.lambda = j.at("lambda").get<double>();
  m.target_transform =
      ParseTargetTransform(j.at("target_transform").get<std::string>());
  m.layout = FeatureLayout::FromJson(j.at("layout"));
  return m;
}

RidgeModel TrainRidge(std::span<const double> features,
                      std::span<const double> targets,
                      const FeatureLayout& layout, double lambda,
                      TargetTransform transform) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("ridge lambda must be a finite value >= 0");
  }
  const auto n = static_cast<Eigen::Index>(targets.size());
  if (n < 1) throw DataError("ridge training needs at least 1 row");
  const auto d = static_cast<Eigen::Index>(features.size()) / n;
  if (d * n != static_cast<Eigen::Index>(features.size())) {
    throw DataError("feature matrix size does not match row count");
  }

  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      x(r, c) = features[static_cast<std::size_t>(r * d + c)];
    }
    double t = targets[static_cast<std::size_t>(r)];
    if (!std::isfinite(t) ||
        (transform == TargetTransform::kLog && !(t > 0.0))) {
      throw DataError("invalid ridge training target");
    }
    y(r) = transform == TargetTransform::kLog ? std::log(t) : t;
  }
  if (!x.allFinite()) throw DataError("non-finite feature value");

  Eigen::RowVectorXd x_mean = x.colwise().mean();
  double y_mean = y.mean();
  Eigen::MatrixXd xc = x.rowwise() - x_mean;
  Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd stacked(n + d, d);
  stacked.topRows(n) = xc;
  stacked.bottomRows(d) =
      std::sqrt(lambda) * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + d);
  rhs.head(n) = yc;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  // Relative rank threshold on R's diagonal.
  qr.setThreshold(1e-12);
  if (qr.rank() < d) {
    throw DataError(
        "ridge system is singular (rank " + std::to_string(qr.rank()) +
        " < " + std::to_string(d) + "); use lambda > 0");
  }
  Eigen::VectorXd w = qr.solve(rhs);

  RidgeModel m;
  m.weights.assign(w.data(), w.data() + w.size());
  m.intercept = y_mean - x_mean.dot(w);
  m.lambda = lambda;
  m.target_transform = transform;
  m.layout = layout;
  return m;
}

RidgeModel TrainRidge(std::span<const TrainingRow> rows, double lambda,
                      TargetTransform transform) {
  if (rows.empty()) throw DataError("ridge training needs at least 1 row");
  const FeatureLayout layout = rows.front().x.layout;
  std::vector<double> x;
  std::vector<double> y;
  for (const TrainingRow& row : rows) {
    if (!(row.x.layout == layout)) {
      throw DataError("training rows have inconsistent feature layouts");
    }
    x.insert(x.end(), row.x.values.begin(), row.x.values.end());
    y.push_back(row.runtime_s);
  }
  return TrainRidge(x, y, layout, lambda, transform);
}

}  // namespace metainf
