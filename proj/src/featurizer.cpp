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

#include "metainf/featurizer.h"

#include <algorithm>
#include <set>

#include "metainf/error.h"
#include "metainf/json_io.h"

namespace metainf {

using nlohmann::json;

namespace {

constexpr int kData = 0;
constexpr int kModel = 1;
constexpr int kHardware = 2;

constexpr EntityKind kKinds[3] = {EntityKind::kData, EntityKind::kModel,
                                  EntityKind::kHardware};

SvdModel FitClamped(const std::vector<EmbeddingVector>& raw, int requested,
                    EntityKind kind, std::vector<std::string>& warnings) {
  const int count = static_cast<int>(raw.size());
  const int raw_dim = static_cast<int>(raw.front().dim());
  if (count == 1) {
    // A single entity carries no variance; every reduction is the origin.
    warnings.push_back(std::string("only one ") + ToString(kind) +
                       " entity; its reduced embedding is constant");
    SvdModel m;
    m.mean_vector = Eigen::Map<const Eigen::VectorXd>(raw[0].values.data(),
                                                      raw_dim);
    m.right_factors = Eigen::MatrixXd::Zero(raw_dim, 1);
    m.right_factors(0, 0) = 1.0;
    m.singular_values = Eigen::VectorXd::Zero(1);
    return m;
  }
  int k = std::min({requested, count, raw_dim});
  if (k < requested) {
    warnings.push_back("SVD rank " + std::to_string(requested) +
                       " clamped to " + std::to_string(k) + " for " +
                       ToString(kind) + " embeddings (" +
                       std::to_string(count) + " vectors, raw_dim " +
                       std::to_string(raw_dim) + ")");
  }
  return FitSvd(raw, k);
}

json MatrixToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw DataError("ragged matrix in model file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json VectorToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFromJson(const json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string Featurizer::ModelEntityKey(const std::string& model_id,
                                       const MethodConfig& method) {
  return model_id + "#" + std::to_string(MethodIndex(method));
}

std::shared_ptr<const Featurizer> Featurizer::Fit(
    const EmbeddingConfig& config, const Catalog& catalog,
    const PerformanceTensor& tensor,
    std::shared_ptr<EmbeddingProvider> provider) {
  if (config.rank < 1) throw UsageError("SVD rank must be >= 1");
  if (!provider) throw UsageError("featurizer needs an embedding provider");
  if (tensor.num_tasks() == 0) throw DataError("empty training tensor");
  std::shared_ptr<Featurizer> f(new Featurizer());
  f->config_ = config;
  f->provider_ = std::move(provider);
  f->models_ = catalog.models;

  std::vector<TaskProfile> tasks;
  std::set<std::string> model_ids;
  for (const std::string& id : tensor.tasks()) {
    tasks.push_back(catalog.task(id));
    model_ids.insert(tasks.back().model);
  }
  std::vector<std::pair<ModelProfile, MethodConfig>> model_entities;
  for (const std::string& id : model_ids) {
    ModelProfile model = f->ResolveModel(id);
    for (const MethodConfig& m : tensor.methods()) {
      model_entities.emplace_back(model, m);
    }
  }
  std::vector<HardwareProfile> hardware;
  for (const std::string& id : tensor.hardware()) {
    hardware.push_back(catalog.hardware_profile(id));
  }

  if (config.style == PromptStyle::kOneHot) {
    for (const auto& t : tasks) f->universes_[kData].push_back(t.id);
    for (const auto& [model, m] : model_entities) {
      f->universes_[kModel].push_back(ModelEntityKey(model.id, m));
    }
    for (const auto& h : hardware) f->universes_[kHardware].push_back(h.id);
    for (int k = 0; k < 3; ++k) {
      f->dims_[k] = static_cast<int>(f->universes_[k].size());
      f->ranks_.push_back(0);
    }
    return f;
  }

  std::vector<std::string> texts[3];
  for (const auto& t : tasks) texts[kData].push_back(RenderPrompt(t, config.style));
  for (const auto& [model, m] : model_entities) {
    texts[kModel].push_back(RenderPrompt(model, m, config.style));
  }
  for (const auto& h : hardware) {
    texts[kHardware].push_back(RenderPrompt(h, config.style));
  }
  for (int k = 0; k < 3; ++k) {
    auto raw = f->provider_->EmbedBatch(texts[k], kKinds[k]);
    f->svd_[k] = FitClamped(raw, config.rank, kKinds[k], f->warnings_);
    f->dims_[k] = f->svd_[k]->rank();
    f->ranks_.push_back(f->svd_[k]->rank());
  }
  return f;
}

EmbeddingVector Featurizer::EmbedText(const std::string& text,
                                      EntityKind kind) const {
  const int k = static_cast<int>(kind);
  EmbeddingVector raw = provider_->Embed(text, kind);
  return Reduce(*svd_[k], raw);
}

ModelProfile Featurizer::ResolveModel(const std::string& model_id) const {
  auto it = models_.find(model_id);
  if (it != models_.end()) return it->second;
  ModelProfile m;
  m.id = model_id.empty() ? "unknown" : model_id;
  return m;
}

EmbeddingVector Featurizer::TaskEmbedding(const TaskProfile& task) const {
  if (config_.style == PromptStyle::kOneHot) {
    return OneHot(task.id, universes_[kData], EntityKind::kData);
  }
  return EmbedText(RenderPrompt(task, config_.style), EntityKind::kData);
}

EmbeddingVector Featurizer::ModelEmbedding(const ModelProfile& model,
                                           const MethodConfig& method) const {
  if (config_.style == PromptStyle::kOneHot) {
    return OneHot(ModelEntityKey(model.id, method), universes_[kModel],
                  EntityKind::kModel);
  }
  return EmbedText(RenderPrompt(model, method, config_.style),
                   EntityKind::kModel);
}

EmbeddingVector Featurizer::HardwareEmbedding(const HardwareProfile& hw) const {
  if (config_.style == PromptStyle::kOneHot) {
    return OneHot(hw.id, universes_[kHardware], EntityKind::kHardware);
  }
  return EmbedText(RenderPrompt(hw, config_.style), EntityKind::kHardware);
}

json Featurizer::ToJson() const {
  json j;
  j["style"] = ToString(config_.style);
  j["requested_rank"] = config_.rank;
  const auto& p = config_.provider;
  j["provider"] = {{"kind", p.kind == ProviderKind::kHttp ? "http" : "fallback"},
                   {"model_name", p.model_name},
                   {"raw_dim", p.raw_dim}};
  j["models"] = json::array();
  for (const auto& [id, m] : models_) j["models"].push_back(m);
  j["kinds"] = json::array();
  for (int k = 0; k < 3; ++k) {
    json kind;
    kind["kind"] = ToString(kKinds[k]);
    kind["dim"] = dims_[k];
    if (config_.style == PromptStyle::kOneHot) {
      kind["universe"] = universes_[k];
    } else {
      kind["right_factors"] = MatrixToJson(svd_[k]->right_factors);
      kind["singular_values"] = VectorToJson(svd_[k]->singular_values);
      kind["mean_vector"] = VectorToJson(svd_[k]->mean_vector);
    }
    j["kinds"].push_back(std::move(kind));
  }
  j["warnings"] = warnings_;
  return j;
}

std::shared_ptr<const Featurizer> Featurizer::FromJson(
    const json& j, std::shared_ptr<EmbeddingProvider> provider) {
  std::shared_ptr<Featurizer> f(new Featurizer());
  auto style = ParsePromptStyle(j.at("style").get<std::string>());
  if (!style) throw DataError("unknown prompt style in model file");
  f->config_.style = *style;
  f->config_.rank = j.at("requested_rank").get<int>();
  f->config_.provider = provider ? provider->spec() : EmbeddingProviderSpec{};
  if (provider &&
      provider->spec().raw_dim != j.at("provider").at("raw_dim").get<int>()) {
    throw DataError("embedding provider raw_dim differs from the model file");
  }
  f->provider_ = std::move(provider);
  for (const json& m : j.at("models")) {
    auto model = m.get<ModelProfile>();
    f->models_.emplace(model.id, model);
  }
  const json& kinds = j.at("kinds");
  if (kinds.size() != 3) throw DataError("model file needs three embedding kinds");
  for (int k = 0; k < 3; ++k) {
    const json& kind = kinds[static_cast<std::size_t>(k)];
    f->dims_[k] = kind.at("dim").get<int>();
    if (f->config_.style == PromptStyle::kOneHot) {
      f->universes_[k] = kind.at("universe").get<std::vector<std::string>>();
      f->ranks_.push_back(0);
    } else {
      SvdModel svd;
      svd.right_factors = MatrixFromJson(kind.at("right_factors"));
      svd.singular_values = VectorFromJson(kind.at("singular_values"));
      svd.mean_vector = VectorFromJson(kind.at("mean_vector"));
      if (svd.right_factors.cols() != svd.singular_values.size() ||
          svd.right_factors.rows() != svd.mean_vector.size()) {
        throw DataError("inconsistent SVD shapes in model file");
      }
      f->ranks_.push_back(svd.rank());
      f->svd_[k] = std::move(svd);
    }
  }
  f->warnings_ = j.value("warnings", std::vector<std::string>{});
  if (f->config_.style != PromptStyle::kOneHot && !f->provider_) {
    throw UsageError("text-embedding model file needs an embedding provider");
  }
  return f;
}

}  // namespace metainf
