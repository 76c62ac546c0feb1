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
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "metainf/config.h"
#include "metainf/domain.h"
#include "metainf/featurizer.h"
#include "metainf/perfdb.h"
#include "metainf/selection.h"
#include "metainf/selectors.h"

namespace metainf {

// An immutable trained selector plus the id echoed in every response.
struct Snapshot {
  std::shared_ptr<const Selector> selector;
  std::string model_version;  // SHA-256 prefix of the serialized selector
  nlohmann::json model;       // serialized selector
};

std::shared_ptr<const Snapshot> MakeSnapshot(std::shared_ptr<const Selector> selector);

struct TrainOutcome {
  std::shared_ptr<const Snapshot> snapshot;
  std::size_t train_rows = 0;
  std::vector<std::string> warnings;
};

// Assembles the tensor, fits the featurizer and the selector.
TrainOutcome TrainFromRecords(const RecordStore& store, const Catalog& catalog,
                              const SelectorSpec& spec,
                              const EmbeddingConfig& embedding,
                              std::shared_ptr<EmbeddingProvider> provider);

// Request decoding shared by the HTTP service and library callers.
//
// task: {"description", "batch_size", optional "id", "prompt_count",
// "source_tag"}; the id defaults to a digest of the other fields.
TaskProfile TaskFromRequest(const nlohmann::json& request);
// hardware: {"gpu_class", "gpu_count", "price_per_hour", optional "id",
// "memory_gb"}. A catalog profile with the same class and count supplies
// the id and memory, else one with the same class supplies the memory.
HardwareProfile HardwareFromRequest(const nlohmann::json& request,
                                    const Catalog& catalog);
// "budget": number or null (null falls back to `default_budget`, then to
// unlimited).
Budget BudgetFromRequest(const nlohmann::json& request,
                         std::optional<double> default_budget);

// Wire encoding of a selection, without the "model_version" field.
nlohmann::json SelectionToWire(const SelectionResult& result);

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

// Selection and training behind an HTTP/1.1 JSON API:
//   GET /v1/health, POST /v1/select, POST /v1/records, POST /v1/train.
// Selections run against the snapshot current when the request arrived;
// training holds an exclusive lock and swaps the snapshot when done.
class Service {
 public:
  Service(AppConfig config, std::shared_ptr<EmbeddingProvider> provider,
          OracleFactory oracle_factory = nullptr);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Loads the record store, catalog and model file named by the config
  // when they exist.
  void LoadState();

  std::shared_ptr<const Snapshot> snapshot() const;
  void Install(std::shared_ptr<const Snapshot> snapshot);
  const Catalog& catalog() const { return catalog_; }
  std::size_t record_count() const;

  ServiceResponse Health() const;
  ServiceResponse HandleSelect(const std::string& body) const;
  ServiceResponse HandleRecords(const std::string& body);
  ServiceResponse HandleTrain(const std::string& body);

  // Binds (port 0 picks a free port) and returns the bound port.
  int Bind();
  // Blocks serving requests until Stop().
  void Run();
  void Stop();

 private:
  struct Http;

  AppConfig config_;
  std::shared_ptr<EmbeddingProvider> provider_;
  OracleFactory oracle_factory_;
  Catalog catalog_;

  mutable std::shared_mutex store_mutex_;
  RecordStore store_;

  std::mutex train_mutex_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;

  std::unique_ptr<Http> http_;
};

}  // namespace metainf
