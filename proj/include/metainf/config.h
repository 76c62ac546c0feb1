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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "metainf/embedding.h"
#include "metainf/selectors.h"

namespace metainf {

struct AppConfig {
  std::filesystem::path records_path = "metainf-data/records.jsonl";
  std::filesystem::path catalog_path = "metainf-data/catalog.json";
  std::filesystem::path model_path = "metainf-data/model.json";
  EmbeddingProviderSpec provider;
  PromptStyle style = PromptStyle::kRich;
  int rank = 64;
  SelectorKind selector = SelectorKind::kMetaInf;
  std::string host = "127.0.0.1";
  int port = 8080;
  double request_timeout_s = 30.0;
  std::optional<double> default_budget;

  // Throws UsageError on an invalid value.
  void Validate() const;

  // Points all three paths into `dir`.
  void SetDataDir(const std::filesystem::path& dir);
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Process environment.
std::optional<std::string> GetEnv(const std::string& name);

// Defaults, then the TOML file (if given), then METAINF_* variables:
// METAINF_RECORDS, METAINF_CATALOG, METAINF_MODEL, METAINF_DATA_DIR,
// METAINF_EMBED_PROVIDER, METAINF_EMBED_ENDPOINT, METAINF_EMBED_MODEL,
// METAINF_EMBED_TIMEOUT_S, METAINF_EMBED_RAW_DIM, METAINF_EMBED_MAX_IN_FLIGHT,
// METAINF_STYLE, METAINF_RANK, METAINF_SELECTOR, METAINF_HOST, METAINF_PORT,
// METAINF_REQUEST_TIMEOUT_S, METAINF_DEFAULT_BUDGET.
AppConfig LoadConfig(const std::optional<std::filesystem::path>& toml_path,
                     const EnvLookup& env = GetEnv);

AppConfig ParseConfigToml(std::string_view text, const EnvLookup& env = GetEnv);

}  // namespace metainf
