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
#include <string>
#include <vector>

#include "metainf/domain.h"

namespace metainf {

class Featurizer;

// Segment boundaries of a feature vector:
//   [data | model | hardware | batch_size, gpu_count,
//    prefix_caching, chunked_prefill, continuous_batching]
struct FeatureLayout {
  static constexpr int kSideCount = 5;
  static constexpr int kBatchSize = 0;
  static constexpr int kGpuCount = 1;
  static constexpr int kPrefixCaching = 2;
  static constexpr int kChunkedPrefill = 3;
  static constexpr int kContinuousBatching = 4;

  int data_dim = 0;
  int model_dim = 0;
  int hardware_dim = 0;

  int model_offset() const { return data_dim; }
  int hardware_offset() const { return data_dim + model_dim; }
  int side_offset() const { return data_dim + model_dim + hardware_dim; }
  int size() const { return side_offset() + kSideCount; }

  bool operator==(const FeatureLayout&) const = default;
  nlohmann::json ToJson() const;
  static FeatureLayout FromJson(const nlohmann::json& j);
};

struct FeatureVector {
  std::vector<double> values;
  FeatureLayout layout;

  bool operator==(const FeatureVector&) const = default;
};

FeatureLayout LayoutOf(const Featurizer& featurizer);

// Concatenates precomputed embeddings with the side features. DataError
// when an embedding's length does not match its layout segment.
FeatureVector AssembleFeatures(const FeatureLayout& layout,
                               std::span<const double> data,
                               std::span<const double> model,
                               std::span<const double> hardware,
                               const TaskProfile& task,
                               const MethodConfig& method,
                               const HardwareProfile& hw);

// Embeds all three entities with `featurizer` and assembles the vector.
FeatureVector BuildFeatures(const TaskProfile& task, const ModelProfile& model,
                            const MethodConfig& method,
                            const HardwareProfile& hw,
                            const Featurizer& featurizer);

struct TrainingRow {
  FeatureVector x;
  double runtime_s = 0.0;
};

enum class TargetTransform { kIdentity, kLog };

const char* ToString(TargetTransform t);
TargetTransform ParseTargetTransform(std::string_view name);

// Lower bound applied to every runtime prediction.
inline constexpr double kMinPredictedRuntime = 1e-6;

}  // namespace metainf
