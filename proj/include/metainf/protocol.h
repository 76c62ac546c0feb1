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

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metainf/featurizer.h"
#include "metainf/metrics.h"
#include "metainf/selectors.h"
#include "metainf/synth.h"

namespace metainf {

// Contexts a protocol run samples from, with the ground truth to score them.
struct EvalPool {
  std::vector<TaskProfile> tasks;
  std::vector<HardwareProfile> hardware;
  std::vector<MethodConfig> methods;
  TruthFunction truth;
};

// Unseen evaluation tasks (or the training tasks when `seen`) on every
// synthetic hardware profile.
EvalPool MakeEvalPool(const SynthData& data, bool seen = false);

struct Trial {
  std::size_t task = 0;
  std::size_t hardware = 0;
};

// `count` (task, hardware) pairs drawn uniformly with replacement.
std::vector<Trial> SampleTrials(const EvalPool& pool, int count, uint64_t seed);

struct NamedSelector {
  std::string name;
  std::shared_ptr<const Selector> selector;
};

struct SelectorReport {
  std::string name;
  std::vector<TrialOutcome> outcomes;
  // (trial index, message) for trials where selection threw.
  std::vector<std::pair<int, std::string>> failures;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::optional<double> acceleration_ratio;
  std::optional<double> mean_rank;

  // Correct selections over all trials, failed trials counted as misses.
  double accuracy_all_trials() const;
  nlohmann::json ToJson() const;
};

SelectorReport EvaluateSelector(const NamedSelector& selector,
                                const EvalPool& pool,
                                const std::vector<Trial>& trials,
                                const Budget& budget = Budget::Unlimited());

struct ProtocolReport {
  uint64_t seed = 0;
  int trials = 0;
  Budget budget = Budget::Unlimited();
  std::vector<SelectorReport> selectors;

  const SelectorReport& at(const std::string& name) const;

  // {"v", "seed", "trials", "budget", "order", "selectors": {name: metrics}}
  nlohmann::json ToJson() const;
  // selector,accuracy,macro_f1,acceleration_ratio,mean_rank,n_trials,failures
  std::string SummaryCsv() const;
  // selector,trial,task,hardware,selected,true_best,true_best_rank,
  // selected_runtime_s,best_runtime_s,mean_runtime_s
  std::string TrialCsv() const;
};

ProtocolReport RunProtocol(const std::vector<NamedSelector>& selectors,
                           const EvalPool& pool, int trials, uint64_t seed,
                           const Budget& budget = Budget::Unlimited());

// Embedding pipeline plus selector settings for one experiment.
struct ExperimentConfig {
  EmbeddingConfig embedding;
  SelectorSpec base;  // kind is overridden per selector
  std::vector<SelectorKind> kinds{std::begin(kTrainableSelectors),
                                  std::end(kTrainableSelectors)};
  bool include_oracle = true;
  bool include_random = true;
};

struct FittedSet {
  std::shared_ptr<const Featurizer> featurizer;
  std::vector<NamedSelector> selectors;
};

// Fits the featurizer and every requested selector on the synthetic
// records; adds the synthetic oracle and the random selector when asked.
FittedSet FitExperiment(const ExperimentConfig& config, const SynthData& data,
                        std::shared_ptr<EmbeddingProvider> provider);

// FitExperiment + RunProtocol on the unseen pool.
ProtocolReport RunExperiment(const ExperimentConfig& config,
                             const SynthData& data,
                             std::shared_ptr<EmbeddingProvider> provider,
                             int trials, uint64_t seed);

struct AblationCell {
  PromptStyle style = PromptStyle::kRich;
  int rank = 64;
  bool seen_only = false;  // one-hot cells run on training tasks
  std::vector<int> effective_ranks;
  std::vector<std::string> warnings;
  ProtocolReport report;
  // One-hot cells only: the same selectors attempted on unseen tasks, where
  // every trial fails with an unknown-id error.
  std::optional<ProtocolReport> unseen_attempt;
};

struct AblationReport {
  std::vector<AblationCell> cells;

  const AblationCell& at(PromptStyle style, int rank) const;
  nlohmann::json ToJson() const;
  // style,rank,evaluation,selector,accuracy,macro_f1,acceleration_ratio,mean_rank
  std::string Csv() const;
};

// Every (style, rank) cell evaluates all selectors in `config` on one trial
// sample; one-hot cells cannot embed unseen tasks, so their metrics come
// from a sample of the training tasks drawn with the same seed, and the
// unseen sample is attempted separately.
AblationReport RunAblation(const ExperimentConfig& config,
                           const SynthData& data,
                           std::shared_ptr<EmbeddingProvider> provider,
                           const std::vector<PromptStyle>& styles,
                           const std::vector<int>& ranks, int trials,
                           uint64_t seed);

}  // namespace metainf
