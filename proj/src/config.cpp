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

#include "metainf/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "metainf/error.h"

namespace metainf {

namespace {

double ParseDouble(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw UsageError(name + " must be a number, got '" + v + "'");
}

int ParseInt(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    int i = std::stoi(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw UsageError(name + " must be an integer, got '" + v + "'");
}

ProviderKind ParseProvider(const std::string& v) {
  if (v == "fallback") return ProviderKind::kFallback;
  if (v == "http") return ProviderKind::kHttp;
  throw UsageError("embedding provider must be 'fallback' or 'http', got '" + v + "'");
}

PromptStyle ParseStyle(const std::string& v) {
  auto s = ParsePromptStyle(v);
  if (!s) throw UsageError("unknown prompt style '" + v + "'");
  return *s;
}

SelectorKind ParseKind(const std::string& v) {
  auto k = ParseSelectorKind(v);
  if (!k) throw UsageError("unknown selector kind '" + v + "'");
  return *k;
}

void ApplyToml(AppConfig& c, const toml::table& t) {
  if (auto v = t["store"]["data_dir"].value<std::string>()) c.SetDataDir(*v);
  if (auto v = t["store"]["records"].value<std::string>()) c.records_path = *v;
  if (auto v = t["store"]["catalog"].value<std::string>()) c.catalog_path = *v;
  if (auto v = t["store"]["model"].value<std::string>()) c.model_path = *v;
  if (auto v = t["embedding"]["provider"].value<std::string>()) c.provider.kind = ParseProvider(*v);
  if (auto v = t["embedding"]["endpoint"].value<std::string>()) c.provider.endpoint = *v;
  if (auto v = t["embedding"]["model_name"].value<std::string>()) c.provider.model_name = *v;
  if (auto v = t["embedding"]["timeout_s"].value<double>()) c.provider.timeout_s = *v;
  if (auto v = t["embedding"]["raw_dim"].value<int>()) c.provider.raw_dim = *v;
  if (auto v = t["embedding"]["max_in_flight"].value<int>()) c.provider.max_in_flight = *v;
  if (auto v = t["embedding"]["style"].value<std::string>()) c.style = ParseStyle(*v);
  if (auto v = t["embedding"]["rank"].value<int>()) c.rank = *v;
  if (auto v = t["selector"]["kind"].value<std::string>()) c.selector = ParseKind(*v);
  if (auto v = t["service"]["host"].value<std::string>()) c.host = *v;
  if (auto v = t["service"]["port"].value<int>()) c.port = *v;
  if (auto v = t["service"]["request_timeout_s"].value<double>()) c.request_timeout_s = *v;
  if (auto v = t["service"]["default_budget"].value<double>()) c.default_budget = *v;
}

void ApplyEnv(AppConfig& c, const EnvLookup& env) {
  auto get = [&](const char* name) { return env(name); };
  if (auto v = get("METAINF_DATA_DIR")) c.SetDataDir(*v);
  if (auto v = get("METAINF_RECORDS")) c.records_path = *v;
  if (auto v = get("METAINF_CATALOG")) c.catalog_path = *v;
  if (auto v = get("METAINF_MODEL")) c.model_path = *v;
  if (auto v = get("METAINF_EMBED_PROVIDER")) c.provider.kind = ParseProvider(*v);
  if (auto v = get("METAINF_EMBED_ENDPOINT")) {
    c.provider.endpoint = *v;
    c.provider.kind = ProviderKind::kHttp;
  }
  if (auto v = get("METAINF_EMBED_MODEL")) c.provider.model_name = *v;
  if (auto v = get("METAINF_EMBED_TIMEOUT_S")) {
    c.provider.timeout_s = ParseDouble("METAINF_EMBED_TIMEOUT_S", *v);
  }
  if (auto v = get("METAINF_EMBED_RAW_DIM")) {
    c.provider.raw_dim = ParseInt("METAINF_EMBED_RAW_DIM", *v);
  }
  if (auto v = get("METAINF_EMBED_MAX_IN_FLIGHT")) {
    c.provider.max_in_flight = ParseInt("METAINF_EMBED_MAX_IN_FLIGHT", *v);
  }
  if (auto v = get("METAINF_STYLE")) c.style = ParseStyle(*v);
  if (auto v = get("METAINF_RANK")) c.rank = ParseInt("METAINF_RANK", *v);
  if (auto v = get("METAINF_SELECTOR")) c.selector = ParseKind(*v);
  if (auto v = get("METAINF_HOST")) c.host = *v;
  if (auto v = get("METAINF_PORT")) c.port = ParseInt("METAINF_PORT", *v);
  if (auto v = get("METAINF_REQUEST_TIMEOUT_S")) {
    c.request_timeout_s = ParseDouble("METAINF_REQUEST_TIMEOUT_S", *v);
  }
  if (auto v = get("METAINF_DEFAULT_BUDGET")) {
    c.default_budget = ParseDouble("METAINF_DEFAULT_BUDGET", *v);
  }
}

}  // namespace

void AppConfig::SetDataDir(const std::filesystem::path& dir) {
  records_path = dir / "records.jsonl";
  catalog_path = dir / "catalog.json";
  model_path = dir / "model.json";
}

void AppConfig::Validate() const {
  provider.Validate();
  if (rank < 1) throw UsageError("rank must be >= 1");
  if (port < 0 || port > 65535) throw UsageError("port must be in [0, 65535]");
  if (!(request_timeout_s > 0.0)) throw UsageError("request timeout must be > 0");
  if (default_budget && !(*default_budget >= 0.0)) {
    throw UsageError("default budget must be >= 0");
  }
}

std::optional<std::string> GetEnv(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

AppConfig ParseConfigToml(std::string_view text, const EnvLookup& env) {
  AppConfig c;
  try {
    ApplyToml(c, toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw UsageError(msg.str());
  }
  ApplyEnv(c, env);
  c.Validate();
  return c;
}

AppConfig LoadConfig(const std::optional<std::filesystem::path>& toml_path,
                     const EnvLookup& env) {
  if (!toml_path) {
    AppConfig c;
    ApplyEnv(c, env);
    c.Validate();
    return c;
  }
  std::ifstream in(*toml_path);
  if (!in) throw UsageError("cannot read config file " + toml_path->string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfigToml(buf.str(), env);
}

}  // namespace metainf
