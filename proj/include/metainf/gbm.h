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

#include <cstdint>
#include <json.hpp>
#include <span>
#include <vector>

#include "metainf/features.h"

namespace metainf {

struct GbmHyperparams {
  int n_rounds = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double subsample = 1.0;
  uint64_t seed = 0;
  TargetTransform target_transform = TargetTransform::kLog;

  // Throws UsageError when a field is out of range.
  void Validate() const;
  nlohmann::json ToJson() const;
  static GbmHyperparams FromJson(const nlohmann::json& j);
};

// Axis-aligned regression tree; rows with x[feature] <= threshold go left.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int samples = 0;
  };

  std::vector<Node> nodes;

  double Predict(std::span<const double> x) const;
  int depth() const;
};

// Squared-error gradient boosting: each round fits a tree to the current
// residuals and adds learning_rate times its output.
struct GbmModel {
  static constexpr int kFormatVersion = 1;

  double base_prediction = 0.0;  // mean of transformed targets
  std::vector<RegressionTree> trees;
  GbmHyperparams hyperparams;
  FeatureLayout layout;
  // Training MSE in transformed space after each round (index 0 = base).
  std::vector<double> round_losses;

  TargetTransform target_transform() const {
    return hyperparams.target_transform;
  }

  // base + lr * sum(trees), before the inverse transform.
  double PredictTransformed(std::span<const double> x) const;
  // Inverse-transformed runtime clamped to [kMinPredictedRuntime, max].
  // DataError when the input does not match the layout.
  double Predict(std::span<const double> x) const;
  double Predict(const FeatureVector& x) const;

  nlohmann::json ToJson() const;
  static GbmModel FromJson(const nlohmann::json& j);
};

// Needs >= 2 rows sharing one layout, with finite positive targets (or any
// finite targets under the identity transform). Rows are put in a canonical
// order first, so the fit does not depend on input order.
GbmModel TrainGbm(std::span<const TrainingRow> rows, const GbmHyperparams& hp);

// Same, on a row-major matrix (num_rows x layout.size()).
GbmModel TrainGbm(std::span<const double> features, std::span<const double> targets,
                  const FeatureLayout& layout, const GbmHyperparams& hp);

}  // namespace metainf
