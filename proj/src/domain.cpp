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

#include "metainf/domain.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metainf/error.h"

namespace metainf {

const char* ToString(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return "usage";
    case ErrorCategory::kData:
      return "data";
    case ErrorCategory::kInfeasible:
      return "infeasible";
    case ErrorCategory::kProvider:
      return "provider";
    case ErrorCategory::kIo:
      return "io";
    case ErrorCategory::kIntegrity:
      return "integrity";
  }
  return "unknown";
}

namespace {

std::string FormatCost(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

}  // namespace

InfeasibleError::InfeasibleError(double cheapest_cost, double budget)
    : Error(ErrorCategory::kInfeasible,
            "no method fits budget " + FormatCost(budget) +
                "; cheapest candidate costs " + FormatCost(cheapest_cost)),
      cheapest_cost_(cheapest_cost),
      budget_(budget) {}

int MethodIndex(const MethodConfig& config) {
  return (config.prefix_caching ? 4 : 0) + (config.chunked_prefill ? 2 : 0) +
         (config.continuous_batching ? 1 : 0);
}

MethodConfig MethodFromIndex(int index) {
  if (index < 0 || index >= kMethodCount) {
    throw DataError("method index out of range: " + std::to_string(index));
  }
  return MethodConfig{(index & 4) != 0, (index & 2) != 0, (index & 1) != 0};
}

std::vector<MethodConfig> AllMethods() {
  std::vector<MethodConfig> out;
  out.reserve(kMethodCount);
  for (int i = 0; i < kMethodCount; ++i) out.push_back(MethodFromIndex(i));
  return out;
}

std::string MethodName(const MethodConfig& config) {
  if (config == methods::kNone) return "None";
  if (config == methods::kAll) return "All";
  std::string name;
  auto append = [&name](const char* part) {
    if (!name.empty()) name += " + ";
    name += part;
  };
  if (config.prefix_caching) append("Prefix Caching");
  if (config.chunked_prefill) append("Chunked Prefill");
  if (config.continuous_batching) append("Continuous Batching");
  return name;
}

std::optional<MethodConfig> ParseMethodName(std::string_view name) {
  for (const MethodConfig& m : AllMethods()) {
    if (MethodName(m) == name) return m;
  }
  if (name == "none") return methods::kNone;
  if (name == "all") return methods::kAll;
  if (name == "chunked_prefill") return methods::kChunkedPrefill;
  if (name == "continuous_batching") return methods::kContinuousBatching;
  if (name == "prefix_caching") return methods::kPrefixCaching;
  return std::nullopt;
}

void TaskProfile::Validate() const {
  if (id.empty()) throw DataError("task id must be non-empty");
  if (description.empty()) {
    throw DataError("task '" + id + "': description must be non-empty");
  }
  if (batch_size < 1) {
    throw DataError("task '" + id + "': batch_size must be >= 1");
  }
  if (prompt_count < 1) {
    throw DataError("task '" + id + "': prompt_count must be >= 1");
  }
  if (feature_count < 0) {
    throw DataError("task '" + id + "': feature_count must be >= 0");
  }
}

void ModelProfile::Validate() const {
  if (id.empty()) throw DataError("model id must be non-empty");
  if (!(parameters_b >= 0.0) || !std::isfinite(parameters_b)) {
    throw DataError("model '" + id + "': parameters_b must be >= 0");
  }
}

void HardwareProfile::Validate() const {
  if (id.empty()) throw DataError("hardware id must be non-empty");
  if (gpu_count < 1) {
    throw DataError("hardware '" + id + "': gpu_count must be >= 1");
  }
  if (!(memory_gb > 0.0) || !std::isfinite(memory_gb)) {
    throw DataError("hardware '" + id + "': memory_gb must be > 0");
  }
  if (!(price_per_hour >= 0.0) || !std::isfinite(price_per_hour)) {
    throw DataError("hardware '" + id + "': price_per_hour must be >= 0");
  }
}

void PerformanceRecord::Validate() const {
  if (task.empty()) throw DataError("record task id must be non-empty");
  if (hardware.empty()) throw DataError("record hardware id must be non-empty");
  if (!(runtime_s > 0.0) || !std::isfinite(runtime_s)) {
    throw DataError("record " + KeyOf(*this).ToString() +
                    ": runtime_s must be a finite positive number");
  }
  if (runtime_std_s &&
      (!(*runtime_std_s >= 0.0) || !std::isfinite(*runtime_std_s))) {
    throw DataError("record " + KeyOf(*this).ToString() +
                    ": runtime_std_s must be >= 0");
  }
}

std::string RecordKey::ToString() const {
  return "(" + task + ", " + MethodName(MethodFromIndex(method)) + ", " +
         hardware + ")";
}

RecordKey KeyOf(const PerformanceRecord& record) {
  return RecordKey{record.task, MethodIndex(record.method), record.hardware};
}

PerformanceTensor::PerformanceTensor(std::vector<std::string> tasks,
                                     std::vector<MethodConfig> methods,
                                     std::vector<std::string> hardware)
    : tasks_(std::move(tasks)),
      methods_(std::move(methods)),
      hardware_(std::move(hardware)),
      values_(tasks_.size() * methods_.size() * hardware_.size()) {}

std::size_t PerformanceTensor::offset(std::size_t task, std::size_t method,
                                      std::size_t hardware) const {
  if (task >= tasks_.size() || method >= methods_.size() ||
      hardware >= hardware_.size()) {
    throw IntegrityError("tensor index out of range");
  }
  return (task * methods_.size() + method) * hardware_.size() + hardware;
}

const std::optional<double>& PerformanceTensor::at(std::size_t task,
                                                   std::size_t method,
                                                   std::size_t hardware) const {
  return values_[offset(task, method, hardware)];
}

void PerformanceTensor::set(std::size_t task, std::size_t method,
                            std::size_t hardware, double runtime_s) {
  if (!(runtime_s > 0.0) || !std::isfinite(runtime_s)) {
    throw DataError("tensor cells must hold finite positive runtimes");
  }
  values_[offset(task, method, hardware)] = runtime_s;
}

void PerformanceTensor::clear(std::size_t task, std::size_t method,
                              std::size_t hardware) {
  values_[offset(task, method, hardware)].reset();
}

namespace {

std::optional<std::size_t> Find(const std::vector<std::string>& ids,
                                std::string_view id) {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

std::optional<std::size_t> PerformanceTensor::task_index(
    std::string_view id) const {
  return Find(tasks_, id);
}

std::optional<std::size_t> PerformanceTensor::method_position(
    const MethodConfig& m) const {
  auto it = std::find(methods_.begin(), methods_.end(), m);
  if (it == methods_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - methods_.begin());
}

std::optional<std::size_t> PerformanceTensor::hardware_index(
    std::string_view id) const {
  return Find(hardware_, id);
}

std::size_t PerformanceTensor::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(),
                    [](const std::optional<double>& v) { return v.has_value(); }));
}

const char* ToString(EntityKind kind) {
  switch (kind) {
    case EntityKind::kData:
      return "data";
    case EntityKind::kModel:
      return "model";
    case EntityKind::kHardware:
      return "hardware";
  }
  return "unknown";
}

const char* ToString(Provenance provenance) {
  return provenance == Provenance::kProvider ? "provider" : "fallback";
}

void EmbeddingVector::Validate() const {
  if (values.empty()) throw DataError("embedding must have dim >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("embedding has non-finite entry");
  }
}

Budget Budget::Unlimited() {
  return Budget{std::numeric_limits<double>::infinity()};
}

bool Budget::unlimited() const { return std::isinf(limit); }

}  // namespace metainf
