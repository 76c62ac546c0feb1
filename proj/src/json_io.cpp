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

#include "metainf/json_io.h"

#include <cmath>
#include <string>

#include "metainf/error.h"

namespace metainf {

using nlohmann::json;

double RequireNumber(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number()) {
    throw DataError(std::string("field '") + field + "' must be a number");
  }
  double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw DataError(std::string("field '") + field + "' must be finite");
  }
  return v;
}

namespace {

bool RequireBool(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_boolean()) {
    throw DataError(std::string("field '") + field + "' must be a boolean");
  }
  return it->get<bool>();
}

std::string RequireString(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw DataError(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::string OptionalString(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw DataError(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

int RequireInt(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer()) {
    throw DataError(std::string("field '") + field + "' must be an integer");
  }
  return it->get<int>();
}

int OptionalInt(const json& j, const char* field, int fallback) {
  if (!j.contains(field) || j.at(field).is_null()) return fallback;
  return RequireInt(j, field);
}

}  // namespace

void to_json(json& j, const MethodConfig& m) {
  j = json{{"prefix_caching", m.prefix_caching},
           {"chunked_prefill", m.chunked_prefill},
           {"continuous_batching", m.continuous_batching}};
}

void from_json(const json& j, MethodConfig& m) {
  m.prefix_caching = RequireBool(j, "prefix_caching");
  m.chunked_prefill = RequireBool(j, "chunked_prefill");
  m.continuous_batching = RequireBool(j, "continuous_batching");
}

void to_json(json& j, const TaskProfile& t) {
  j = json{{"id", t.id},
           {"description", t.description},
           {"batch_size", t.batch_size},
           {"prompt_count", t.prompt_count},
           {"source_tag", t.source_tag},
           {"model", t.model}};
  if (t.feature_count != 0) j["feature_count"] = t.feature_count;
  if (!t.objective.empty()) j["objective"] = t.objective;
}

void from_json(const json& j, TaskProfile& t) {
  t.id = RequireString(j, "id");
  t.description = RequireString(j, "description");
  t.batch_size = RequireInt(j, "batch_size");
  t.prompt_count = OptionalInt(j, "prompt_count", 1);
  t.source_tag = OptionalString(j, "source_tag");
  t.model = OptionalString(j, "model");
  t.feature_count = OptionalInt(j, "feature_count", 0);
  t.objective = OptionalString(j, "objective");
  t.Validate();
}

void to_json(json& j, const ModelProfile& m) {
  j = json{{"id", m.id},
           {"family", m.family},
           {"parameters_b", m.parameters_b},
           {"description", m.description}};
}

void from_json(const json& j, ModelProfile& m) {
  m.id = RequireString(j, "id");
  m.family = OptionalString(j, "family");
  m.parameters_b = j.contains("parameters_b") ? RequireNumber(j, "parameters_b")
                                              : 0.0;
  m.description = OptionalString(j, "description");
  m.Validate();
}

void to_json(json& j, const HardwareProfile& h) {
  j = json{{"id", h.id},
           {"gpu_class", h.gpu_class},
           {"gpu_count", h.gpu_count},
           {"memory_gb", h.memory_gb},
           {"price_per_hour", h.price_per_hour},
           {"description", h.description}};
}

void from_json(const json& j, HardwareProfile& h) {
  h.id = RequireString(j, "id");
  h.gpu_class = RequireString(j, "gpu_class");
  h.gpu_count = RequireInt(j, "gpu_count");
  h.memory_gb = RequireNumber(j, "memory_gb");
  h.price_per_hour = RequireNumber(j, "price_per_hour");
  h.description = OptionalString(j, "description");
  h.Validate();
}

void to_json(json& j, const RankedMethod& r) {
  j = json(r.method);
  j["name"] = MethodName(r.method);
  j["predicted_runtime_s"] = r.predicted_runtime_s;
}

void to_json(json& j, const SelectionResult& r) {
  j = json{{"method", json(r.method)},
           {"method_name", MethodName(r.method)},
           {"predicted_runtime_s", r.predicted_runtime_s},
           {"cost", r.cost.amount},
           {"feasible_set_size", r.feasible_set_size},
           {"ranking", json(r.ranking)}};
}

}  // namespace metainf
