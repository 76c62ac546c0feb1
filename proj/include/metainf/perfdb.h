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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metainf/domain.h"

namespace metainf {

enum class RecordFormat { kJsonl, kCsv };

std::optional<RecordFormat> ParseRecordFormat(std::string_view name);

// Historical performance records, at most one per (task, method, hardware).
//
// Not internally synchronized: callers serialize writers (single-writer
// contract) and hand immutable copies to training.
class RecordStore {
 public:
  static constexpr int kSchemaVersion = 1;
  static constexpr const char* kSchemaName = "metainf.records";

  // Parses every line of `in`, then commits atomically: on a malformed line
  // (DataError naming the 1-based line) or a conflicting runtime for an
  // existing key (DataError naming the key) nothing is added. Identical
  // duplicates are accepted. Returns the number of valid records read.
  std::size_t Ingest(std::istream& in, RecordFormat format);

  // Same conflict rules as Ingest for a single record.
  void Add(const PerformanceRecord& record);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const PerformanceRecord* Find(const RecordKey& key) const;
  // Records in key order.
  std::vector<PerformanceRecord> records() const;

  // Axes are the sorted distinct task ids, methods (by MethodIndex) and
  // hardware ids; absent combinations are missing cells. Throws DataError
  // when the store is empty.
  PerformanceTensor AssembleTensor() const;

  // Header line {"schema":..., "version":N} followed by one JSONL record
  // per line. Runtimes round-trip bit-exactly.
  void Save(const std::filesystem::path& path) const;
  static RecordStore Load(const std::filesystem::path& path);

  bool operator==(const RecordStore&) const = default;

 private:
  std::map<RecordKey, PerformanceRecord> records_;
};

// One record line <-> PerformanceRecord, in either wire format.
PerformanceRecord ParseJsonRecord(std::string_view line);
std::string FormatJsonRecord(const PerformanceRecord& record);
PerformanceRecord ParseCsvRecord(std::string_view line);

inline constexpr const char* kCsvHeader =
    "task,prefix_caching,chunked_prefill,continuous_batching,hardware,"
    "runtime_s,runtime_std_s";

// Descriptive metadata for the ids that appear in records; needed to render
// prompts and side features.
struct Catalog {
  static constexpr int kSchemaVersion = 1;

  std::map<std::string, TaskProfile> tasks;
  std::map<std::string, ModelProfile> models;
  std::map<std::string, HardwareProfile> hardware;

  // Throws DataError naming the missing id.
  const TaskProfile& task(const std::string& id) const;
  const ModelProfile& model(const std::string& id) const;
  const HardwareProfile& hardware_profile(const std::string& id) const;

  void AddTask(const TaskProfile& task);
  void AddModel(const ModelProfile& model);
  void AddHardware(const HardwareProfile& hw);

  // Adds entries from `other`; identical duplicates are fine, differing
  // ones are a DataError.
  void Merge(const Catalog& other);

  void Save(const std::filesystem::path& path) const;
  static Catalog Load(const std::filesystem::path& path);

  bool operator==(const Catalog&) const = default;
};

}  // namespace metainf
