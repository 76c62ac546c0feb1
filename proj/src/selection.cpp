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

#include "metainf/selection.h"

#include <cmath>
#include <limits>

#include "metainf/error.h"

namespace metainf {

CostEstimate EstimateCost(const HardwareProfile& hw, double predicted_runtime_s) {
  if (!(predicted_runtime_s > 0.0)) {
    throw DataError("predicted runtime must be positive to estimate cost");
  }
  return {hw.price_per_hour * (predicted_runtime_s / 3600.0),
          RuntimeSource::kPredicted};
}

SelectionResult SelectFromRanking(std::vector<RankedMethod> ranking,
                                  const HardwareProfile& hw,
                                  const Budget& budget) {
  if (std::isnan(budget.limit) || budget.limit < 0.0) {
    throw UsageError("budget must be >= 0");
  }
  if (ranking.empty()) throw DataError("no candidate methods to select from");
  const RankedMethod* best = nullptr;
  double best_cost = 0.0;
  double cheapest = std::numeric_limits<double>::infinity();
  std::size_t feasible = 0;
  for (const RankedMethod& r : ranking) {
    const double cost = EstimateCost(hw, r.predicted_runtime_s).amount;
    cheapest = std::min(cheapest, cost);
    if (!(cost <= budget.limit)) continue;
    ++feasible;
    bool better =
        best == nullptr || r.predicted_runtime_s < best->predicted_runtime_s ||
        (r.predicted_runtime_s == best->predicted_runtime_s &&
         (cost < best_cost ||
          (cost == best_cost && MethodIndex(r.method) < MethodIndex(best->method))));
    if (better) {
      best = &r;
      best_cost = cost;
    }
  }
  if (best == nullptr) throw InfeasibleError(cheapest, budget.limit);
  SelectionResult out;
  out.method = best->method;
  out.predicted_runtime_s = best->predicted_runtime_s;
  out.cost = {best_cost, RuntimeSource::kPredicted};
  out.feasible_set_size = feasible;
  out.ranking = std::move(ranking);
  return out;
}

SelectionResult Select(const SelectionRequest& request) {
  if (!request.selector) throw UsageError("selection needs a fitted selector");
  request.hardware.Validate();
  return SelectFromRanking(
      request.selector->RankMethods(request.task, request.hardware),
      request.hardware, request.budget);
}

}  // namespace metainf
