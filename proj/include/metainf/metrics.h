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

#include <span>
#include <string>
#include <vector>

#include "metainf/domain.h"

namespace metainf {

// One evaluated (task, hardware) context.
struct TrialOutcome {
  std::string task;
  std::string hardware;
  MethodConfig selected;
  MethodConfig true_best;  // argmin of true runtimes, ties to lower MethodIndex
  std::vector<MethodConfig> predicted_ranking;
  std::vector<MethodConfig> methods;     // candidates
  std::vector<double> true_runtimes_s;   // aligned with `methods`
  double selected_runtime_s = 0.0;
  double mean_runtime_s = 0.0;
};

// Fills true_best, selected_runtime_s and mean_runtime_s from the runtimes.
// IntegrityError when `selected` is not a candidate.
TrialOutcome MakeOutcome(std::string task, std::string hardware,
                         MethodConfig selected,
                         std::vector<MethodConfig> predicted_ranking,
                         std::vector<MethodConfig> methods,
                         std::vector<double> true_runtimes_s);

// All four throw DataError on an empty outcome set.
double SelectionAccuracy(std::span<const TrialOutcome> outcomes);
// Unweighted mean of per-class F1 over the classes present in true_best.
double MacroF1(std::span<const TrialOutcome> outcomes);
// Mean over trials of mean_runtime / selected_runtime (larger is better).
double AccelerationRatio(std::span<const TrialOutcome> outcomes);
// Mean 1-based position of true_best in the predicted ranking;
// IntegrityError when it is missing.
double MeanRank(std::span<const TrialOutcome> outcomes);
int RankOfTrueBest(const TrialOutcome& outcome);

}  // namespace metainf
