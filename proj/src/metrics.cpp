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

#include "metainf/metrics.h"

#include <algorithm>
#include <map>

#include "metainf/error.h"

namespace metainf {

namespace {

void RequireNonEmpty(std::span<const TrialOutcome> outcomes, const char* what) {
  if (outcomes.empty()) {
    throw DataError(std::string(what) + " needs at least one trial outcome");
  }
}

}  // namespace

TrialOutcome MakeOutcome(std::string task, std::string hardware,
                         MethodConfig selected,
                         std::vector<MethodConfig> predicted_ranking,
                         std::vector<MethodConfig> methods,
                         std::vector<double> true_runtimes_s) {
  if (methods.empty() || methods.size() != true_runtimes_s.size()) {
    throw DataError("trial needs one true runtime per candidate method");
  }
  TrialOutcome o;
  o.task = std::move(task);
  o.hardware = std::move(hardware);
  o.selected = selected;
  o.predicted_ranking = std::move(predicted_ranking);
  std::size_t best = 0;
  double sum = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const double r = true_runtimes_s[i];
    if (!(r > 0.0)) throw DataError("true runtimes must be positive");
    sum += r;
    if (r < true_runtimes_s[best] ||
        (r == true_runtimes_s[best] &&
         MethodIndex(methods[i]) < MethodIndex(methods[best]))) {
      best = i;
    }
    if (methods[i] == selected) {
      o.selected_runtime_s = r;
      found = true;
    }
  }
  if (!found) throw IntegrityError("selected method is not a candidate");
  o.true_best = methods[best];
  o.mean_runtime_s = sum / static_cast<double>(methods.size());
  o.methods = std::move(methods);
  o.true_runtimes_s = std::move(true_runtimes_s);
  return o;
}

double SelectionAccuracy(std::span<const TrialOutcome> outcomes) {
  RequireNonEmpty(outcomes, "accuracy");
  std::size_t hit = 0;
  for (const auto& o : outcomes) hit += o.selected == o.true_best;
  return static_cast<double>(hit) / static_cast<double>(outcomes.size());
}

double MacroF1(std::span<const TrialOutcome> outcomes) {
  RequireNonEmpty(outcomes, "macro F1");
  struct Counts {
    double tp = 0, fp = 0, fn = 0;
    bool in_truth = false;
  };
  std::map<int, Counts> classes;
  for (const auto& o : outcomes) {
    const int t = MethodIndex(o.true_best);
    const int p = MethodIndex(o.selected);
    classes[t].in_truth = true;
    if (t == p) {
      classes[t].tp += 1;
    } else {
      classes[t].fn += 1;
      classes[p].fp += 1;
    }
  }
  double sum = 0.0;
  int n = 0;
  for (const auto& [c, k] : classes) {
    if (!k.in_truth) continue;
    sum += 2 * k.tp / (2 * k.tp + k.fp + k.fn);
    ++n;
  }
  return sum / n;
}

double AccelerationRatio(std::span<const TrialOutcome> outcomes) {
  RequireNonEmpty(outcomes, "acceleration ratio");
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (!(o.selected_runtime_s > 0.0)) throw DataError("selected runtime must be positive");
    sum += o.mean_runtime_s / o.selected_runtime_s;
  }
  return sum / static_cast<double>(outcomes.size());
}

int RankOfTrueBest(const TrialOutcome& o) {
  auto it = std::find(o.predicted_ranking.begin(), o.predicted_ranking.end(),
                      o.true_best);
  if (it == o.predicted_ranking.end()) {
    throw IntegrityError("true best method missing from the predicted ranking");
  }
  return static_cast<int>(it - o.predicted_ranking.begin()) + 1;
}

double MeanRank(std::span<const TrialOutcome> outcomes) {
  RequireNonEmpty(outcomes, "mean rank");
  double sum = 0.0;
  for (const auto& o : outcomes) sum += RankOfTrueBest(o);
  return sum / static_cast<double>(outcomes.size());
}

}  // namespace metainf
