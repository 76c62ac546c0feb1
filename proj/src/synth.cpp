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

#include "metainf/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>

#include "metainf/embedding.h"
#include "metainf/error.h"
#include "metainf/json_io.h"
#include "rng.h"

namespace metainf {

using nlohmann::json;

namespace {

// Method runtime relative to continuous batching at the high batch column,
// for a model whose measured ratios differ from the reference curve.
struct Motivation {
  double chunked_prefill;  // improvement over continuous batching, fraction
  double prefix_caching;
  double all;
};

std::array<double, kMethodCount> AffinityFrom(const SynthSpec& s,
                                              const Motivation& m) {
  std::array<double, kMethodCount> a = {1, 1, 1, 1, 1, 1, 1, 1};
  const double cb = s.reference_high[MethodIndex(methods::kContinuousBatching)];
  auto set = [&](const MethodConfig& method, double improvement) {
    const int i = MethodIndex(method);
    a[i] = (1.0 - improvement) * cb / s.reference_high[i];
  };
  set(methods::kChunkedPrefill, m.chunked_prefill);
  set(methods::kPrefixCaching, m.prefix_caching);
  set(methods::kAll, m.all);
  return a;
}

double TaskFactor(const SynthSpec& s, const std::string& task_id) {
  if (s.task_sigma == 0.0) return 1.0;
  std::string digest = Sha256Hex(std::string("task-factor") + '\0' + task_id);
  std::mt19937_64 gen(std::stoull(digest.substr(0, 16), nullptr, 16));
  return std::exp(s.task_sigma * rng::StandardNormal(gen));
}

const SynthModel* FindModel(const SynthSpec& s, const std::string& id) {
  for (const auto& m : s.models) {
    if (m.profile.id == id) return &m;
  }
  return nullptr;
}

bool IsMeasured(const SynthSpec& s, int index) {
  return s.reference_low[static_cast<std::size_t>(index)] > 0.0 &&
         s.reference_high[static_cast<std::size_t>(index)] > 0.0;
}

// Reference curve times model affinity, for a measured method.
double MeasuredCurve(const SynthSpec& s, const SynthModel* model, int index,
                     int batch) {
  const double lo = std::log2(static_cast<double>(s.reference_batch_low));
  const double hi = std::log2(static_cast<double>(s.reference_batch_high));
  const double t =
      std::clamp((std::log2(static_cast<double>(batch)) - lo) / (hi - lo), 0.0, 1.0);
  const auto i = static_cast<std::size_t>(index);
  double v = std::exp((1.0 - t) * std::log(s.reference_low[i]) +
                      t * std::log(s.reference_high[i]));
  if (model) v *= model->affinity[i];
  return v;
}

double MethodCurve(const SynthSpec& s, const SynthModel* model,
                   const MethodConfig& method, int batch, bool low_memory) {
  const int index = MethodIndex(method);
  double v;
  if (IsMeasured(s, index)) {
    v = MeasuredCurve(s, model, index, batch);
  } else {
    // Unmeasured combination: the faster of its measured single flags.
    v = std::numeric_limits<double>::infinity();
    const MethodConfig singles[] = {methods::kPrefixCaching,
                                    methods::kChunkedPrefill,
                                    methods::kContinuousBatching};
    const bool on[] = {method.prefix_caching, method.chunked_prefill,
                       method.continuous_batching};
    for (int f = 0; f < 3; ++f) {
      if (on[f]) v = std::min(v, MethodCurve(s, model, singles[f], batch, low_memory));
    }
    return v * s.pair_overhead;
  }
  if (low_memory && method.prefix_caching && !method.chunked_prefill) {
    v *= s.memory_penalty;
  }
  return v;
}

std::string Pad(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", i);
  return buf;
}

constexpr const char* kTopics[] = {
    "customer support", "code review",  "travel planning", "math tutoring",
    "legal summaries",  "medical triage", "product search", "story writing",
    "data analysis",    "translation"};
constexpr int kPromptCounts[] = {500, 1000, 2000, 5000};

TaskProfile MakeTask(const SynthSpec& s, const std::string& id,
                     std::mt19937_64& gen) {
  TaskProfile t;
  t.id = id;
  t.model = s.models[rng::Index(gen, s.models.size())].profile.id;
  t.batch_size = s.batch_grid[rng::Index(gen, s.batch_grid.size())];
  t.source_tag = s.sources[rng::Index(gen, s.sources.size())];
  t.prompt_count = kPromptCounts[rng::Index(gen, 4)];
  const char* topic = kTopics[rng::Index(gen, std::size(kTopics))];
  t.description = std::string(topic) + " prompts resembling " + t.source_tag +
                  ", " + std::to_string(t.prompt_count) +
                  " requests with up to 2048 output tokens";
  return t;
}

json ArrayJson(const std::array<double, kMethodCount>& a) {
  return json(std::vector<double>(a.begin(), a.end()));
}

std::array<double, kMethodCount> ArrayFromJson(const json& j) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != kMethodCount) throw DataError("synth spec array needs 8 entries");
  std::array<double, kMethodCount> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

}  // namespace

void SynthSpec::Validate() const {
  auto fail = [](const std::string& m) { throw UsageError("synth spec: " + m); };
  if (train_tasks < 2) fail("train_tasks must be >= 2");
  if (eval_tasks < 1) fail("eval_tasks must be >= 1");
  if (models.empty()) fail("needs at least one model");
  if (hardware.empty()) fail("needs at least one hardware profile");
  if (batch_grid.empty() || sources.empty() || methods.empty()) {
    fail("batch grid, sources and methods must be non-empty");
  }
  for (int b : batch_grid) {
    if (b < 1) fail("batch sizes must be >= 1");
  }
  for (const auto& m : models) {
    m.profile.Validate();
    if (!(m.scale > 0.0)) fail("model scale must be > 0");
    for (double a : m.affinity) {
      if (!(a > 0.0)) fail("model affinities must be > 0");
    }
  }
  for (const auto& h : hardware) h.Validate();
  for (const auto& [c, v] : class_scale) {
    if (!(v > 0.0)) fail("class scale for " + c + " must be > 0");
  }
  if (!(reference_batch_low >= 1 && reference_batch_high > reference_batch_low)) {
    fail("reference batch columns must be increasing");
  }
  for (int i = 0; i < kMethodCount; ++i) {
    const bool lo = reference_low[static_cast<std::size_t>(i)] > 0.0;
    const bool hi = reference_high[static_cast<std::size_t>(i)] > 0.0;
    if (lo != hi) fail("reference curve needs both batch columns");
    const MethodConfig m = MethodFromIndex(i);
    const int flags = m.prefix_caching + m.chunked_prefill + m.continuous_batching;
    if (flags <= 1 && !lo) fail("single-flag and baseline curves are required");
  }
  if (!(pair_overhead > 0.0)) fail("pair_overhead must be > 0");
  if (reference_gpu_count < 1) fail("reference_gpu_count must be >= 1");
  if (!(memory_penalty > 0.0)) fail("memory_penalty must be > 0");
  if (!(task_sigma >= 0.0)) fail("task_sigma must be >= 0");
  if (!(noise_fraction >= 0.0 && noise_fraction <= 0.3)) {
    fail("noise_fraction must be in [0, 0.3]");
  }
  for (double c : method_cv) {
    if (!(c >= 0.0)) fail("method_cv must be >= 0");
  }
  if (repeats < 1) fail("repeats must be >= 1");
}

json SynthSpec::ToJson() const {
  json models_j = json::array();
  for (const auto& m : models) {
    models_j.push_back({{"profile", m.profile},
                        {"scale", m.scale},
                        {"affinity", ArrayJson(m.affinity)}});
  }
  json methods_j = json::array();
  for (const auto& m : methods) methods_j.push_back(MethodIndex(m));
  return {{"seed", seed},
          {"train_tasks", train_tasks},
          {"eval_tasks", eval_tasks},
          {"models", models_j},
          {"hardware", hardware},
          {"class_scale", class_scale},
          {"batch_grid", batch_grid},
          {"sources", sources},
          {"methods", methods_j},
          {"reference_batch_low", reference_batch_low},
          {"reference_batch_high", reference_batch_high},
          {"reference_low", ArrayJson(reference_low)},
          {"reference_high", ArrayJson(reference_high)},
          {"pair_overhead", pair_overhead},
          {"reference_gpu_count", reference_gpu_count},
          {"gpu_alpha", gpu_alpha},
          {"gpu_beta", gpu_beta},
          {"low_memory_gb", low_memory_gb},
          {"memory_penalty", memory_penalty},
          {"task_sigma", task_sigma},
          {"noise_fraction", noise_fraction},
          {"method_cv", ArrayJson(method_cv)},
          {"repeats", repeats}};
}

SynthSpec SynthSpec::FromJson(const json& j) {
  // Absent fields keep the default calibration.
  SynthSpec s = DefaultSynthSpec();
  s.seed = j.value("seed", s.seed);
  s.train_tasks = j.value("train_tasks", s.train_tasks);
  s.eval_tasks = j.value("eval_tasks", s.eval_tasks);
  if (j.contains("models")) {
    s.models.clear();
    for (const json& m : j.at("models")) {
      SynthModel sm;
      sm.profile = m.at("profile").get<ModelProfile>();
      sm.scale = m.value("scale", 1.0);
      if (m.contains("affinity")) sm.affinity = ArrayFromJson(m.at("affinity"));
      s.models.push_back(sm);
    }
  }
  if (j.contains("hardware")) {
    s.hardware = j.at("hardware").get<std::vector<HardwareProfile>>();
  }
  if (j.contains("class_scale")) {
    s.class_scale = j.at("class_scale").get<std::map<std::string, double>>();
  }
  s.batch_grid = j.value("batch_grid", s.batch_grid);
  s.sources = j.value("sources", s.sources);
  if (j.contains("methods")) {
    s.methods.clear();
    for (const json& m : j.at("methods")) s.methods.push_back(MethodFromIndex(m.get<int>()));
  }
  s.reference_batch_low = j.value("reference_batch_low", s.reference_batch_low);
  s.reference_batch_high = j.value("reference_batch_high", s.reference_batch_high);
  if (j.contains("reference_low")) s.reference_low = ArrayFromJson(j.at("reference_low"));
  if (j.contains("reference_high")) s.reference_high = ArrayFromJson(j.at("reference_high"));
  s.pair_overhead = j.value("pair_overhead", s.pair_overhead);
  s.reference_gpu_count = j.value("reference_gpu_count", s.reference_gpu_count);
  s.gpu_alpha = j.value("gpu_alpha", s.gpu_alpha);
  s.gpu_beta = j.value("gpu_beta", s.gpu_beta);
  s.low_memory_gb = j.value("low_memory_gb", s.low_memory_gb);
  s.memory_penalty = j.value("memory_penalty", s.memory_penalty);
  s.task_sigma = j.value("task_sigma", s.task_sigma);
  s.noise_fraction = j.value("noise_fraction", s.noise_fraction);
  if (j.contains("method_cv")) s.method_cv = ArrayFromJson(j.at("method_cv"));
  s.repeats = j.value("repeats", s.repeats);
  s.Validate();
  return s;
}

SynthSpec DefaultSynthSpec() {
  SynthSpec s;
  auto set = [&](const MethodConfig& m, double lo, double hi, double cv) {
    s.reference_low[static_cast<std::size_t>(MethodIndex(m))] = lo;
    s.reference_high[static_cast<std::size_t>(MethodIndex(m))] = hi;
    s.method_cv[static_cast<std::size_t>(MethodIndex(m))] = cv;
  };
  // Latency at batch 16 / 256 on 4 x L4, and run-to-run CV on 4 GPUs.
  set(methods::kNone, 1435.27, 1424.99, 0.050);
  set(methods::kChunkedPrefill, 128.70, 114.44, 5.43 / 120.89);
  set(methods::kContinuousBatching, 146.44, 107.40, 12.75 / 122.73);
  set(methods::kPrefixCaching, 101.10, 68.46, 11.86 / 79.18);
  set(methods::kAll, 96.21, 80.65, 6.04 / 85.07);
  for (int i = 0; i < kMethodCount; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (s.method_cv[u] > 0.0) continue;
    const MethodConfig m = MethodFromIndex(i);
    double cv = 0.0;
    if (m.prefix_caching) cv = std::max(cv, s.method_cv[MethodIndex(methods::kPrefixCaching)]);
    if (m.chunked_prefill) cv = std::max(cv, s.method_cv[MethodIndex(methods::kChunkedPrefill)]);
    if (m.continuous_batching) {
      cv = std::max(cv, s.method_cv[MethodIndex(methods::kContinuousBatching)]);
    }
    s.method_cv[u] = cv;
  }

  // Improvements over continuous batching at batch 1024 on L4.
  auto model = [&](std::string id, std::string family, double params,
                   std::string desc, double scale,
                   std::optional<Motivation> motivation) {
    SynthModel m;
    m.profile = {std::move(id), std::move(family), params, std::move(desc)};
    m.scale = scale;
    if (motivation) m.affinity = AffinityFrom(s, *motivation);
    s.models.push_back(m);
  };
  model("baichuan2-7b", "Baichuan", 7.0,
        "Baichuan2 7B chat model, bilingual instruction tuned", 0.93,
        Motivation{0.0382, 0.3763, 0.0796});
  model("llama-3.1-8b", "Llama", 8.0,
        "Meta Llama 3.1 8B instruct model with grouped-query attention", 1.0,
        std::nullopt);
  model("phi-2", "Phi", 2.7, "Microsoft Phi-2 small language model", 0.45,
        Motivation{-0.0090, -0.5679, -0.1139});
  model("qwen2.5-7b", "Qwen", 7.6,
        "Qwen2.5 7B instruct model with 1M-token context", 0.97,
        Motivation{0.0415, -0.1066, -0.0720});

  s.hardware = {
      {"a100x4", "A100", 4, 40.0, 12.00, "4 x NVIDIA A100 40GB datacenter GPUs"},
      {"l4x4", "L4", 4, 24.0, 3.20, "4 x NVIDIA L4 24GB inference GPUs"},
      {"l4x8", "L4", 8, 24.0, 6.40, "8 x NVIDIA L4 24GB inference GPUs"},
      {"t4x4", "T4", 4, 16.0, 1.40, "4 x NVIDIA T4 16GB edge GPUs"},
  };
  s.class_scale = {{"A100", 0.45}, {"L4", 1.0}, {"T4", 2.2}};
  s.methods.assign(kNamedMethods.begin(), kNamedMethods.end());
  return s;
}

double SynthRuntime(const SynthSpec& s, const TaskProfile& task,
                    const MethodConfig& method, const HardwareProfile& hw) {
  const SynthModel* model = FindModel(s, task.model);
  const bool low_memory = hw.memory_gb <= s.low_memory_gb;
  double v = MethodCurve(s, model, method, task.batch_size, low_memory);
  if (model) v *= model->scale;
  auto cls = s.class_scale.find(hw.gpu_class);
  if (cls != s.class_scale.end()) v *= cls->second;
  const double g = static_cast<double>(hw.gpu_count) / s.reference_gpu_count;
  v *= std::pow(1.0 / g, s.gpu_alpha) * (1.0 + s.gpu_beta * std::log2(g));
  return v * TaskFactor(s, task.id);
}

TruthFunction SynthTruth(const SynthSpec& spec) {
  return [spec](const TaskProfile& t, const MethodConfig& m,
                const HardwareProfile& hw) { return SynthRuntime(spec, t, m, hw); };
}

SynthData GenerateSynthetic(const SynthSpec& spec) {
  spec.Validate();
  SynthData d;
  d.spec = spec;
  std::mt19937_64 gen(spec.seed);
  for (const auto& m : spec.models) d.catalog.AddModel(m.profile);
  for (const auto& h : spec.hardware) d.catalog.AddHardware(h);

  std::vector<TaskProfile> train;
  for (int i = 0; i < spec.train_tasks; ++i) {
    train.push_back(MakeTask(spec, "train-" + Pad(i), gen));
    d.catalog.AddTask(train.back());
  }
  for (int i = 0; i < spec.eval_tasks; ++i) {
    d.eval_tasks.push_back(MakeTask(spec, "eval-" + Pad(i), gen));
  }

  double max_cv = 0.0;
  for (const auto& m : spec.methods) {
    max_cv = std::max(max_cv, spec.method_cv[static_cast<std::size_t>(MethodIndex(m))]);
  }
  for (const TaskProfile& t : train) {
    for (const MethodConfig& m : spec.methods) {
      const double rel = max_cv > 0.0
          ? spec.method_cv[static_cast<std::size_t>(MethodIndex(m))] / max_cv
          : 0.0;
      const double cv = spec.noise_fraction * rel;
      for (const HardwareProfile& hw : spec.hardware) {
        const double truth = SynthRuntime(spec, t, m, hw);
        const double z = rng::StandardNormal(gen);
        PerformanceRecord r;
        r.task = t.id;
        r.method = m;
        r.hardware = hw.id;
        r.runtime_s =
            truth * std::max(0.05, 1.0 + cv / std::sqrt(spec.repeats) * z);
        r.runtime_std_s = cv * truth;
        d.store.Add(r);
      }
    }
  }

  std::vector<std::string> task_ids;
  for (const auto& t : train) task_ids.push_back(t.id);
  std::sort(task_ids.begin(), task_ids.end());
  std::vector<MethodConfig> ms = spec.methods;
  std::sort(ms.begin(), ms.end(), [](const MethodConfig& a, const MethodConfig& b) {
    return MethodIndex(a) < MethodIndex(b);
  });
  std::vector<std::string> hw_ids;
  for (const auto& h : spec.hardware) hw_ids.push_back(h.id);
  std::sort(hw_ids.begin(), hw_ids.end());
  d.truth = PerformanceTensor(task_ids, ms, hw_ids);
  for (std::size_t i = 0; i < task_ids.size(); ++i) {
    const TaskProfile& t = d.catalog.task(task_ids[i]);
    for (std::size_t j = 0; j < ms.size(); ++j) {
      for (std::size_t k = 0; k < hw_ids.size(); ++k) {
        d.truth.set(i, j, k,
                    SynthRuntime(spec, t, ms[j], d.catalog.hardware_profile(hw_ids[k])));
      }
    }
  }
  return d;
}

std::shared_ptr<const Selector> MakeSynthOracle(const SynthSpec& spec) {
  std::vector<MethodConfig> ms = spec.methods;
  std::sort(ms.begin(), ms.end(), [](const MethodConfig& a, const MethodConfig& b) {
    return MethodIndex(a) < MethodIndex(b);
  });
  return MakeOracleSelector(ms, SynthTruth(spec),
                            json{{"type", "synthetic"}, {"spec", spec.ToJson()}});
}

OracleFactory SynthOracleFactory() {
  return [](const json& descriptor) {
    if (descriptor.value("type", "") != "synthetic") {
      throw DataError("unsupported oracle descriptor");
    }
    return MakeSynthOracle(SynthSpec::FromJson(descriptor.at("spec")));
  };
}

}  // namespace metainf
