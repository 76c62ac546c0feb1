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

#include "metainf/perfdb.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "metainf/error.h"
#include "metainf/json_io.h"

namespace metainf {

using nlohmann::json;

std::optional<RecordFormat> ParseRecordFormat(std::string_view name) {
  if (name == "jsonl") return RecordFormat::kJsonl;
  if (name == "csv") return RecordFormat::kCsv;
  return std::nullopt;
}

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool ParseBoolField(std::string_view s) {
  if (s == "true" || s == "1" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "0" || s == "False" || s == "FALSE") return false;
  throw DataError("invalid boolean '" + std::string(s) + "'");
}

double ParseDoubleField(std::string_view s, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("invalid number for ") + field + ": '" +
                    std::string(s) + "'");
  }
  return v;
}

void CheckConflict(const PerformanceRecord& existing,
                   const PerformanceRecord& incoming) {
  if (!(existing == incoming)) {
    throw DataError("conflicting records for key " +
                    KeyOf(incoming).ToString());
  }
}

}  // namespace

PerformanceRecord ParseJsonRecord(std::string_view line) {
  json j = json::parse(line.begin(), line.end());
  if (!j.is_object()) throw DataError("record must be a JSON object");
  PerformanceRecord r;
  if (!j.contains("task") || !j["task"].is_string()) {
    throw DataError("field 'task' must be a string");
  }
  if (!j.contains("hardware") || !j["hardware"].is_string()) {
    throw DataError("field 'hardware' must be a string");
  }
  r.task = j["task"].get<std::string>();
  r.hardware = j["hardware"].get<std::string>();
  r.method = j.get<MethodConfig>();
  r.runtime_s = RequireNumber(j, "runtime_s");
  if (j.contains("runtime_std_s") && !j["runtime_std_s"].is_null()) {
    r.runtime_std_s = RequireNumber(j, "runtime_std_s");
  }
  r.Validate();
  return r;
}

std::string FormatJsonRecord(const PerformanceRecord& r) {
  json j = json::object();
  j["task"] = r.task;
  j["prefix_caching"] = r.method.prefix_caching;
  j["chunked_prefill"] = r.method.chunked_prefill;
  j["continuous_batching"] = r.method.continuous_batching;
  j["hardware"] = r.hardware;
  j["runtime_s"] = r.runtime_s;
  if (r.runtime_std_s) j["runtime_std_s"] = *r.runtime_std_s;
  return j.dump();
}

PerformanceRecord ParseCsvRecord(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    fields.push_back(Trim(line.substr(start, comma == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != 6 && fields.size() != 7) {
    throw DataError("expected 7 CSV fields, got " +
                    std::to_string(fields.size()));
  }
  PerformanceRecord r;
  r.task = std::string(fields[0]);
  r.method.prefix_caching = ParseBoolField(fields[1]);
  r.method.chunked_prefill = ParseBoolField(fields[2]);
  r.method.continuous_batching = ParseBoolField(fields[3]);
  r.hardware = std::string(fields[4]);
  r.runtime_s = ParseDoubleField(fields[5], "runtime_s");
  if (fields.size() == 7 && !fields[6].empty()) {
    r.runtime_std_s = ParseDoubleField(fields[6], "runtime_std_s");
  }
  r.Validate();
  return r;
}

std::size_t RecordStore::Ingest(std::istream& in, RecordFormat format) {
  std::vector<PerformanceRecord> parsed;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = Trim(line);
    if (view.empty()) continue;
    try {
      if (format == RecordFormat::kCsv) {
        if (!header_seen) {
          if (view != kCsvHeader) {
            throw DataError(std::string("expected CSV header '") + kCsvHeader +
                            "'");
          }
          header_seen = true;
          continue;
        }
        parsed.push_back(ParseCsvRecord(view));
      } else {
        parsed.push_back(ParseJsonRecord(view));
      }
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  // Validate the whole batch against the store and itself before committing.
  std::map<RecordKey, const PerformanceRecord*> batch;
  for (const PerformanceRecord& r : parsed) {
    RecordKey key = KeyOf(r);
    if (auto it = records_.find(key); it != records_.end()) {
      CheckConflict(it->second, r);
    }
    auto [it, inserted] = batch.emplace(key, &r);
    if (!inserted) CheckConflict(*it->second, r);
  }
  for (const PerformanceRecord& r : parsed) records_.emplace(KeyOf(r), r);
  return parsed.size();
}

void RecordStore::Add(const PerformanceRecord& record) {
  record.Validate();
  RecordKey key = KeyOf(record);
  auto [it, inserted] = records_.emplace(key, record);
  if (!inserted) CheckConflict(it->second, record);
}

const PerformanceRecord* RecordStore::Find(const RecordKey& key) const {
  auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<PerformanceRecord> RecordStore::records() const {
  std::vector<PerformanceRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, r] : records_) out.push_back(r);
  return out;
}

PerformanceTensor RecordStore::AssembleTensor() const {
  if (records_.empty()) {
    throw DataError("cannot assemble a tensor from an empty record store");
  }
  std::set<std::string> tasks;
  std::set<int> methods;
  std::set<std::string> hardware;
  for (const auto& [key, r] : records_) {
    tasks.insert(key.task);
    methods.insert(key.method);
    hardware.insert(key.hardware);
  }
  std::vector<MethodConfig> method_axis;
  for (int m : methods) method_axis.push_back(MethodFromIndex(m));
  PerformanceTensor tensor({tasks.begin(), tasks.end()}, std::move(method_axis),
                           {hardware.begin(), hardware.end()});
  for (const auto& [key, r] : records_) {
    tensor.set(*tensor.task_index(key.task), *tensor.method_position(r.method),
               *tensor.hardware_index(key.hardware), r.runtime_s);
  }
  return tensor;
}

void RecordStore::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << json{{"schema", kSchemaName}, {"version", kSchemaVersion}}.dump()
      << '\n';
  for (const auto& [key, r] : records_) out << FormatJsonRecord(r) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

RecordStore RecordStore::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string header;
  if (!std::getline(in, header)) {
    throw DataError("'" + path.string() + "': missing header line");
  }
  json h;
  try {
    h = json::parse(header);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "': bad header: " + e.what());
  }
  if (!h.is_object() || h.value("schema", "") != kSchemaName) {
    throw DataError("'" + path.string() + "': not a record store file");
  }
  if (!h.contains("version") || !h["version"].is_number_integer() ||
      h["version"].get<int>() != kSchemaVersion) {
    throw DataError("'" + path.string() + "': unsupported schema version " +
                    (h.contains("version") ? h["version"].dump() : "<none>") +
                    " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  RecordStore store;
  store.Ingest(in, RecordFormat::kJsonl);
  return store;
}

const TaskProfile& Catalog::task(const std::string& id) const {
  auto it = tasks.find(id);
  if (it == tasks.end()) throw DataError("task '" + id + "' not in catalog");
  return it->second;
}

const ModelProfile& Catalog::model(const std::string& id) const {
  auto it = models.find(id);
  if (it == models.end()) throw DataError("model '" + id + "' not in catalog");
  return it->second;
}

const HardwareProfile& Catalog::hardware_profile(const std::string& id) const {
  auto it = hardware.find(id);
  if (it == hardware.end()) {
    throw DataError("hardware '" + id + "' not in catalog");
  }
  return it->second;
}

namespace {

template <typename Map, typename Value>
void Insert(Map& map, const Value& value, const char* what) {
  value.Validate();
  auto [it, inserted] = map.emplace(value.id, value);
  if (!inserted && !(it->second == value)) {
    throw DataError(std::string("conflicting catalog entries for ") + what +
                    " '" + value.id + "'");
  }
}

}  // namespace

void Catalog::AddTask(const TaskProfile& task) { Insert(tasks, task, "task"); }
void Catalog::AddModel(const ModelProfile& m) { Insert(models, m, "model"); }
void Catalog::AddHardware(const HardwareProfile& hw) {
  Insert(hardware, hw, "hardware");
}

void Catalog::Merge(const Catalog& other) {
  for (const auto& [id, t] : other.tasks) AddTask(t);
  for (const auto& [id, m] : other.models) AddModel(m);
  for (const auto& [id, h] : other.hardware) AddHardware(h);
}

void Catalog::Save(const std::filesystem::path& path) const {
  json j;
  j["schema"] = "metainf.catalog";
  j["version"] = kSchemaVersion;
  j["tasks"] = json::array();
  for (const auto& [id, t] : tasks) j["tasks"].push_back(t);
  j["models"] = json::array();
  for (const auto& [id, m] : models) j["models"].push_back(m);
  j["hardware"] = json::array();
  for (const auto& [id, h] : hardware) j["hardware"].push_back(h);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Catalog Catalog::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
  if (j.value("schema", "") != "metainf.catalog" ||
      j.value("version", -1) != kSchemaVersion) {
    throw DataError("'" + path.string() +
                    "': not a catalog file or unsupported version");
  }
  Catalog c;
  try {
    for (const json& t : j.value("tasks", json::array())) {
      c.AddTask(t.get<TaskProfile>());
    }
    for (const json& m : j.value("models", json::array())) {
      c.AddModel(m.get<ModelProfile>());
    }
    for (const json& h : j.value("hardware", json::array())) {
      c.AddHardware(h.get<HardwareProfile>());
    }
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
  return c;
}

}  // namespace metainf
