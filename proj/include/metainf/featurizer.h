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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metainf/domain.h"
#include "metainf/embedding.h"
#include "metainf/perfdb.h"
#include "metainf/svd.h"

namespace metainf {

struct EmbeddingConfig {
  PromptStyle style = PromptStyle::kRich;
  int rank = 64;
  EmbeddingProviderSpec provider;
};

// The embedding pipeline for one training run: renders prompts, fetches raw
// vectors and reduces them with one SVD model per entity kind (or encodes
// one-hot indicators over the training universes).
//
// The model-side entity is a (served model, method) pair.
class Featurizer {
 public:
  // Fits on the entities named by the tensor axes; the task's model and
  // hardware profiles come from `catalog`. Requested ranks above the number
  // of fitted vectors (or raw_dim) are clamped and a warning is recorded.
  static std::shared_ptr<const Featurizer> Fit(
      const EmbeddingConfig& config, const Catalog& catalog,
      const PerformanceTensor& tensor,
      std::shared_ptr<EmbeddingProvider> provider);

  const EmbeddingConfig& config() const { return config_; }
  PromptStyle style() const { return config_.style; }

  EmbeddingVector TaskEmbedding(const TaskProfile& task) const;
  EmbeddingVector ModelEmbedding(const ModelProfile& model,
                                 const MethodConfig& method) const;
  EmbeddingVector HardwareEmbedding(const HardwareProfile& hw) const;

  // Looks the task's model up in the fitted catalog; unknown models get a
  // minimal profile carrying only the id.
  ModelProfile ResolveModel(const std::string& model_id) const;

  int data_dim() const { return dims_[0]; }
  int model_dim() const { return dims_[1]; }
  int hardware_dim() const { return dims_[2]; }

  // Effective ranks after clamping, per kind (0 for one-hot).
  const std::vector<int>& effective_ranks() const { return ranks_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  nlohmann::json ToJson() const;
  static std::shared_ptr<const Featurizer> FromJson(
      const nlohmann::json& j, std::shared_ptr<EmbeddingProvider> provider);

  // Key of a model-side entity inside the one-hot universe.
  static std::string ModelEntityKey(const std::string& model_id,
                                    const MethodConfig& method);

 private:
  Featurizer() = default;

  EmbeddingVector EmbedText(const std::string& text, EntityKind kind) const;

  EmbeddingConfig config_;
  std::shared_ptr<EmbeddingProvider> provider_;
  std::map<std::string, ModelProfile> models_;
  // One-hot universes (tasks, model entities, hardware).
  std::vector<std::string> universes_[3];
  // Fitted SVD per kind; unset for one-hot.
  std::optional<SvdModel> svd_[3];
  std::vector<int> ranks_;
  int dims_[3] = {0, 0, 0};
  std::vector<std::string> warnings_;
};

}  // namespace metainf
