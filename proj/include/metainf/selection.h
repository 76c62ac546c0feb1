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

#include <memory>
#include <vector>

#include "metainf/domain.h"
#include "metainf/selectors.h"

namespace metainf {

// price_per_hour * runtime / 3600, from a predicted runtime.
CostEstimate EstimateCost(const HardwareProfile& hw, double predicted_runtime_s);

struct SelectionRequest {
  TaskProfile task;
  HardwareProfile hardware;
  Budget budget = Budget::Unlimited();
  std::shared_ptr<const Selector> selector;
};

// Ranks all methods, keeps those whose estimated cost is within the budget
// and returns the fastest; ties go to the cheaper method, then the lower
// MethodIndex. InfeasibleError (carrying the cheapest cost) when nothing fits.
SelectionResult Select(const SelectionRequest& request);

// The budget step of Select on an existing ranking.
SelectionResult SelectFromRanking(std::vector<RankedMethod> ranking,
                                  const HardwareProfile& hw,
                                  const Budget& budget);

}  // namespace metainf
