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

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metainf {

// One combination of the three serving-engine acceleration flags.
struct MethodConfig {
  bool prefix_caching = false;
  bool chunked_prefill = false;
  bool continuous_batching = false;

  auto operator<=>(const MethodConfig&) const = default;
};

inline constexpr int kMethodCount = 8;

// prefix_caching*4 + chunked_prefill*2 + continuous_batching.
int MethodIndex(const MethodConfig& config);
MethodConfig MethodFromIndex(int index);

// Human-readable name; the five measured configurations carry their
// conventional names ("None", "Chunked Prefill", ...), the rest are joined
// flag lists such as "Prefix Caching + Continuous Batching".
std::string MethodName(const MethodConfig& config);
// Accepts names produced by MethodName plus snake_case aliases
// (none, chunked_prefill, continuous_batching, prefix_caching, all).
std::optional<MethodConfig> ParseMethodName(std::string_view name);

namespace methods {
inline constexpr MethodConfig kNone{false, false, false};
inline constexpr MethodConfig kChunkedPrefill{false, true, false};
inline constexpr MethodConfig kContinuousBatching{false, false, true};
inline constexpr MethodConfig kPrefixCaching{true, false, false};
inline constexpr MethodConfig kAll{true, true, true};
}  // namespace methods

// The five configurations used by the measurement campaign.
inline constexpr std::array<MethodConfig, 5> kNamedMethods = {
    methods::kNone, methods::kChunkedPrefill, methods::kContinuousBatching,
    methods::kPrefixCaching, methods::kAll};

std::vector<MethodConfig> AllMethods();

// A workload: a batch of prompts served by one LLM.
struct TaskProfile {
  std::string id;
  std::string description;
  int batch_size = 1;
  int prompt_count = 1;
  std::string source_tag;
  // Served model id (a ModelProfile id).
  std::string model;
  // Optional tabular-style descriptors; 0 / empty means unspecified.
  int feature_count = 0;
  std::string objective;

  bool operator==(const TaskProfile&) const = default;

  // Throws DataError when an invariant is violated.
  void Validate() const;
};

// The LLM being served.
struct ModelProfile {
  std::string id;
  std::string family;
  double parameters_b = 0.0;
  std::string description;

  bool operator==(const ModelProfile&) const = default;
  void Validate() const;
};

struct HardwareProfile {
  std::string id;
  std::string gpu_class;
  int gpu_count = 1;
  double memory_gb = 1.0;  // per GPU
  double price_per_hour = 0.0;
  std::string description;

  bool operator==(const HardwareProfile&) const = default;
  void Validate() const;
};

struct PerformanceRecord {
  std::string task;
  MethodConfig method;
  std::string hardware;
  double runtime_s = 0.0;
  std::optional<double> runtime_std_s;

  bool operator==(const PerformanceRecord&) const = default;
  void Validate() const;
};

// Lookup key of a record. Orders by task id, method index, hardware id.
struct RecordKey {
  std::string task;
  int method = 0;
  std::string hardware;

  auto operator<=>(const RecordKey&) const = default;
  std::string ToString() const;
};

RecordKey KeyOf(const PerformanceRecord& record);

// Dense n x m x h runtime array with optional cells.
class PerformanceTensor {
 public:
  PerformanceTensor() = default;
  PerformanceTensor(std::vector<std::string> tasks,
                    std::vector<MethodConfig> methods,
                    std::vector<std::string> hardware);

  const std::vector<std::string>& tasks() const { return tasks_; }
  const std::vector<MethodConfig>& methods() const { return methods_; }
  const std::vector<std::string>& hardware() const { return hardware_; }

  std::size_t num_tasks() const { return tasks_.size(); }
  std::size_t num_methods() const { return methods_.size(); }
  std::size_t num_hardware() const { return hardware_.size(); }

  const std::optional<double>& at(std::size_t task, std::size_t method,
                                  std::size_t hardware) const;
  // Throws DataError for non-positive or non-finite values.
  void set(std::size_t task, std::size_t method, std::size_t hardware,
           double runtime_s);
  void clear(std::size_t task, std::size_t method, std::size_t hardware);

  std::optional<std::size_t> task_index(std::string_view id) const;
  std::optional<std::size_t> method_position(const MethodConfig& m) const;
  std::optional<std::size_t> hardware_index(std::string_view id) const;

  std::size_t present_count() const;
  bool complete() const { return present_count() == values_.size(); }

  bool operator==(const PerformanceTensor&) const = default;

 private:
  std::size_t offset(std::size_t task, std::size_t method,
                     std::size_t hardware) const;

  std::vector<std::string> tasks_;
  std::vector<MethodConfig> methods_;
  std::vector<std::string> hardware_;
  std::vector<std::optional<double>> values_;
};

enum class EntityKind { kData, kModel, kHardware };
enum class Provenance { kProvider, kFallback };

const char* ToString(EntityKind kind);
const char* ToString(Provenance provenance);

struct EmbeddingVector {
  std::vector<double> values;
  Provenance provenance = Provenance::kFallback;
  EntityKind entity_kind = EntityKind::kData;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
  // Throws DataError on non-finite entries or an empty vector.
  void Validate() const;
};

struct Budget {
  double limit = 0.0;

  static Budget Unlimited();
  bool unlimited() const;
};

enum class RuntimeSource { kPredicted, kMeasured };

struct CostEstimate {
  double amount = 0.0;
  RuntimeSource runtime_source = RuntimeSource::kPredicted;
};

struct RankedMethod {
  MethodConfig method;
  double predicted_runtime_s = 0.0;

  bool operator==(const RankedMethod&) const = default;
};

struct SelectionResult {
  MethodConfig method;
  double predicted_runtime_s = 0.0;
  CostEstimate cost;
  std::size_t feasible_set_size = 0;
  std::vector<RankedMethod> ranking;
};

}  // namespace metainf
