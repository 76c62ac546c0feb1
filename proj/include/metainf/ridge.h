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

#include <json.hpp>
#include <span>
#include <vector>

#include "metainf/features.h"

namespace metainf {

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  TargetTransform target_transform = TargetTransform::kIdentity;
  FeatureLayout layout;

  // Linear prediction before the inverse transform.
  double PredictTransformed(std::span<const double> x) const;
  // Runtime in seconds; clamped below at kMinPredictedRuntime.
  double Predict(std::span<const double> x) const;
  double Predict(const FeatureVector& x) const;

  nlohmann::json ToJson() const;
  static RidgeModel FromJson(const nlohmann::json& j);
};

// Minimizes ||Xc w - yc||^2 + lambda ||w||^2 on centered data, via
// column-pivoted QR of [Xc; sqrt(lambda) I]; intercept = mean(y) - mean(x).w.
// A rank-deficient system with lambda = 0 is a DataError advising lambda > 0.
RidgeModel TrainRidge(std::span<const TrainingRow> rows, double lambda,
                      TargetTransform transform = TargetTransform::kIdentity);
RidgeModel TrainRidge(std::span<const double> features,
                      std::span<const double> targets,
                      const FeatureLayout& layout, double lambda,
                      TargetTransform transform = TargetTransform::kIdentity);

}  // namespace metainf
