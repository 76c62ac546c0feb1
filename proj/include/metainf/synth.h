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
#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "metainf/domain.h"
#include "metainf/perfdb.h"
#include "metainf/selectors.h"

namespace metainf {

// Per-model calibration. Runtimes follow the reference curve scaled by
// `scale`; `affinity[MethodIndex]` multiplies the named methods' effects.
struct SynthModel {
  ModelProfile profile;
  double scale = 1.0;
  std::array<double, kMethodCount> affinity = {1, 1, 1, 1, 1, 1, 1, 1};
};

// Parameters of the synthetic performance generator.
//
//   runtime = reference(method, batch) * affinity(model, method) * scale(model)
//             * class_scale(gpu_class) * gpu_scale(gpu_count)
//             * memory_penalty(method, memory) * task_factor(task)
//
// reference() interpolates the two measured batch columns linearly in
// log2(batch) and clamps outside them. Flag pairs without a measured curve
// take the faster of their two single flags times `pair_overhead`.
struct SynthSpec {
  uint64_t seed = 7;
  int train_tasks = 200;
  int eval_tasks = 200;
  std::vector<SynthModel> models;
  std::vector<HardwareProfile> hardware;
  std::map<std::string, double> class_scale;
  std::vector<int> batch_grid = {16, 64, 256, 1024};
  std::vector<std::string> sources = {"sharegpt", "reasoning-v1-20m"};
  std::vector<MethodConfig> methods;

  // Reference curves: runtime at the low and high batch columns, by
  // MethodIndex (0 for unmeasured pairs).
  int reference_batch_low = 16;
  int reference_batch_high = 256;
  std::array<double, kMethodCount> reference_low{};
  std::array<double, kMethodCount> reference_high{};
  double pair_overhead = 1.03;

  // gpu_scale(g) = (g0/g)^alpha * (1 + beta * log2(g/g0)), g0 = reference.
  int reference_gpu_count = 4;
  double gpu_alpha = 0.06;
  double gpu_beta = 0.005;

  // Prefix caching without chunked prefill on GPUs with at most
  // `low_memory_gb` per device.
  double low_memory_gb = 16.0;
  double memory_penalty = 1.12;

  // Per-task lognormal spread shared by every method.
  double task_sigma = 0.05;
  // Run-to-run coefficient of variation of the noisiest method; the others
  // scale by `method_cv` (by MethodIndex). Records hold means of `repeats`
  // runs.
  double noise_fraction = 0.15;
  std::array<double, kMethodCount> method_cv{};
  int repeats = 8;

  // Throws UsageError on an invalid field.
  void Validate() const;
  nlohmann::json ToJson() const;
  static SynthSpec FromJson(const nlohmann::json& j);
};

// The default calibration: four model families, T4/L4/A100 hardware.
SynthSpec DefaultSynthSpec();

struct SynthData {
  SynthSpec spec;
  RecordStore store;
  Catalog catalog;                     // training tasks, models, hardware
  PerformanceTensor truth;             // noiseless, training tasks
  std::vector<TaskProfile> eval_tasks;  // unseen tasks for evaluation
};

SynthData GenerateSynthetic(const SynthSpec& spec);

// Noiseless runtime of any (task, method, hardware). Unknown GPU classes use
// scale 1; unknown models use the reference curve.
double SynthRuntime(const SynthSpec& spec, const TaskProfile& task,
                    const MethodConfig& method, const HardwareProfile& hw);
TruthFunction SynthTruth(const SynthSpec& spec);

// Serializable oracle over SynthRuntime, and the factory that reloads it.
std::shared_ptr<const Selector> MakeSynthOracle(const SynthSpec& spec);
OracleFactory SynthOracleFactory();

}  // namespace metainf
