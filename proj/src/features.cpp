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

#include "metainf/features.h"

#include <cmath>

#include "metainf/error.h"
#include "metainf/featurizer.h"

namespace metainf {

nlohmann::json FeatureLayout::ToJson() const {
  return {{"data_dim", data_dim},
          {"model_dim", model_dim},
          {"hardware_dim", hardware_dim},
          {"side", {"batch_size", "gpu_count", "prefix_caching",
                    "chunked_prefill", "continuous_batching"}}};
}

FeatureLayout FeatureLayout::FromJson(const nlohmann::json& j) {
  FeatureLayout l;
  l.data_dim = j.at("data_dim").get<int>();
  l.model_dim = j.at("model_dim").get<int>();
  l.hardware_dim = j.at("hardware_dim").get<int>();
  if (l.data_dim < 0 || l.model_dim < 0 || l.hardware_dim < 0) {
    throw DataError("negative layout segment");
  }
  return l;
}

FeatureLayout LayoutOf(const Featurizer& featurizer) {
  return FeatureLayout{featurizer.data_dim(), featurizer.model_dim(),
                       featurizer.hardware_dim()};
}

FeatureVector AssembleFeatures(const FeatureLayout& layout,
                               std::span<const double> data,
                               std::span<const double> model,
                               std::span<const double> hardware,
                               const TaskProfile& task,
                               const MethodConfig& method,
                               const HardwareProfile& hw) {
  auto check = [](std::span<const double> seg, int want, const char* what,
                  const std::string& id) {
    if (static_cast<int>(seg.size()) != want) {
      throw DataError(std::string("missing or mismatched ") + what +
                      " embedding for '" + id + "' (have " +
                      std::to_string(seg.size()) + ", layout expects " +
                      std::to_string(want) + ")");
    }
  };
  check(data, layout.data_dim, "data", task.id);
  check(model, layout.model_dim, "model", task.model);
  check(hardware, layout.hardware_dim, "hardware", hw.id);

  FeatureVector fv;
  fv.layout = layout;
  fv.values.reserve(static_cast<std::size_t>(layout.size()));
  fv.values.insert(fv.values.end(), data.begin(), data.end());
  fv.values.insert(fv.values.end(), model.begin(), model.end());
  fv.values.insert(fv.values.end(), hardware.begin(), hardware.end());
  fv.values.push_back(static_cast<double>(task.batch_size));
  fv.values.push_back(static_cast<double>(hw.gpu_count));
  fv.values.push_back(method.prefix_caching ? 1.0 : 0.0);
  fv.values.push_back(method.chunked_prefill ? 1.0 : 0.0);
  fv.values.push_back(method.continuous_batching ? 1.0 : 0.0);
  for (double v : fv.values) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  return fv;
}

FeatureVector BuildFeatures(const TaskProfile& task, const ModelProfile& model,
                            const MethodConfig& method,
                            const HardwareProfile& hw,
                            const Featurizer& featurizer) {
  EmbeddingVector d = featurizer.TaskEmbedding(task);
  EmbeddingVector m = featurizer.ModelEmbedding(model, method);
  EmbeddingVector h = featurizer.HardwareEmbedding(hw);
  return AssembleFeatures(LayoutOf(featurizer), d.values, m.values, h.values,
                          task, method, hw);
}

const char* ToString(TargetTransform t) {
  return t == TargetTransform::kLog ? "log" : "identity";
}

TargetTransform ParseTargetTransform(std::string_view name) {
  if (name == "log") return TargetTransform::kLog;
  if (name == "identity") return TargetTransform::kIdentity;
  throw DataError("unknown target transform '" + std::string(name) + "'");
}

}  // namespace metainf
