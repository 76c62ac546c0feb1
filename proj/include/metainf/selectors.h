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

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metainf/domain.h"
#include "metainf/featurizer.h"
#include "metainf/gbm.h"
#include "metainf/perfdb.h"

namespace metainf {

enum class SelectorKind {
  kMetaInf,
  kGlobalBest,
  kIsac,
  kArgoSmart,
  kAlors,
  kRidge,
  // Evaluation-only selectors.
  kOracle,
  kRandom,
};

const char* ToString(SelectorKind kind);
std::optional<SelectorKind> ParseSelectorKind(std::string_view name);

// The six trainable selectors in report order.
inline constexpr SelectorKind kTrainableSelectors[] = {
    SelectorKind::kMetaInf, SelectorKind::kGlobalBest, SelectorKind::kIsac,
    SelectorKind::kArgoSmart, SelectorKind::kAlors, SelectorKind::kRidge};

struct SelectorSpec {
  SelectorKind kind = SelectorKind::kMetaInf;
  GbmHyperparams gbm;
  int isac_clusters = 3;
  int isac_restarts = 10;
  int isac_max_iterations = 100;
  int argosmart_neighbors = 1;
  int alors_rank = 3;
  int alors_epochs = 2000;
  double alors_regularization = 1e-2;
  double alors_tolerance = 1e-6;
  double ridge_lambda = 1.0;
  uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static SelectorSpec FromJson(const nlohmann::json& j);
};

// Everything a selector needs at fit time. Methods ranked at query time are
// the tensor's method axis.
struct TrainingContext {
  const PerformanceTensor& tensor;
  const Catalog& catalog;
  std::shared_ptr<const Featurizer> featurizer;
};

// A fitted selector. Immutable after construction; RankMethods is pure and
// safe to call concurrently.
class Selector {
 public:
  virtual ~Selector() = default;

  virtual SelectorKind kind() const = 0;
  const std::vector<MethodConfig>& methods() const { return methods_; }

  // Every candidate method once, ascending predicted runtime, ties broken by
  // MethodIndex.
  std::vector<RankedMethod> RankMethods(const TaskProfile& task,
                                        const HardwareProfile& hw) const;

  // Serializable selectors return their state; evaluation-only ones throw.
  virtual nlohmann::json ToJson() const;

 protected:
  explicit Selector(std::vector<MethodConfig> methods)
      : methods_(std::move(methods)) {}

  // Predicted runtime per entry of methods().
  virtual std::vector<double> Score(const TaskProfile& task,
                                    const HardwareProfile& hw) const = 0;

 private:
  std::vector<MethodConfig> methods_;
};

// Sorts (method, runtime) pairs ascending by runtime then MethodIndex.
std::vector<RankedMethod> SortRanking(std::vector<RankedMethod> ranking);

std::shared_ptr<const Selector> FitSelector(const SelectorSpec& spec,
                                            const TrainingContext& ctx);

// Rebuilds a serialized oracle from its descriptor.
using OracleFactory = std::function<std::shared_ptr<const Selector>(
    const nlohmann::json& descriptor)>;

// Restores a selector written by Selector::ToJson. Text-embedding styles need
// the provider used at training time (same raw_dim). Oracle snapshots need
// `oracle_factory`.
std::shared_ptr<const Selector> LoadSelector(
    const nlohmann::json& j, std::shared_ptr<EmbeddingProvider> provider,
    const OracleFactory& oracle_factory = nullptr);

// Ground-truth selector: scores are supplied by `truth`. Optional
// `descriptor` makes it serializable (see LoadSelector).
using TruthFunction = std::function<double(
    const TaskProfile&, const MethodConfig&, const HardwareProfile&)>;
std::shared_ptr<const Selector> MakeOracleSelector(
    std::vector<MethodConfig> methods, TruthFunction truth,
    nlohmann::json descriptor = nullptr);
// Oracle backed by a tensor; unknown (task, hardware) cells are a DataError.
std::shared_ptr<const Selector> MakeTensorOracle(PerformanceTensor truth);
// Uniform random permutation per (task id, hardware id, seed).
std::shared_ptr<const Selector> MakeRandomSelector(
    std::vector<MethodConfig> methods, uint64_t seed);

// Building blocks, exposed for tests.

// Lloyd's k-means with `restarts` seeded random initializations; keeps the
// lowest-inertia run.
struct KMeansResult {
  Eigen::MatrixXd centroids;  // clusters x dim
  std::vector<int> assignment;
  double inertia = 0.0;
};
KMeansResult KMeans(const Eigen::MatrixXd& points, int clusters, int restarts,
                    int max_iterations, uint64_t seed);
int NearestCentroid(const Eigen::MatrixXd& centroids,
                    const Eigen::VectorXd& point);

// Alternating least squares on the present cells of `values` (mask true).
// Returns row factors (rows x rank) and column factors (cols x rank).
// DataError carrying the last loss if the relative loss change does not fall
// below `tolerance` within `max_epochs`.
struct AlsResult {
  Eigen::MatrixXd row_factors;
  Eigen::MatrixXd col_factors;
  double loss = 0.0;
  int epochs = 0;
};
AlsResult FactorizeAls(const Eigen::MatrixXd& values,
                       const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                       int rank, double regularization, int max_epochs,
                       double tolerance, uint64_t seed);

}  // namespace metainf
