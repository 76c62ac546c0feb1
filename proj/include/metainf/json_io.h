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

#include "metainf/domain.h"

// nlohmann::json adapters for the domain value types. Field names follow the
// record wire schema.
namespace metainf {

void to_json(nlohmann::json& j, const MethodConfig& m);
void from_json(const nlohmann::json& j, MethodConfig& m);

void to_json(nlohmann::json& j, const TaskProfile& t);
void from_json(const nlohmann::json& j, TaskProfile& t);

void to_json(nlohmann::json& j, const ModelProfile& m);
void from_json(const nlohmann::json& j, ModelProfile& m);

void to_json(nlohmann::json& j, const HardwareProfile& h);
void from_json(const nlohmann::json& j, HardwareProfile& h);

void to_json(nlohmann::json& j, const RankedMethod& r);

void to_json(nlohmann::json& j, const SelectionResult& r);

// Reads a double field that must be present and finite.
double RequireNumber(const nlohmann::json& j, const char* field);

}  // namespace metainf
