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

#include "metainf/selectors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "metainf/error.h"
#include "metainf/features.h"
#include "metainf/json_io.h"
#include "metainf/ridge.h"
#include "rng.h"

namespace metainf {

using nlohmann::json;

namespace {

constexpr double kNoData = std::numeric_limits<double>::max();

constexpr std::pair<SelectorKind, const char*> kKindNames[] = {
    {SelectorKind::kMetaInf, "metainf"},
    {SelectorKind::kGlobalBest, "global_best"},
    {SelectorKind::kIsac, "isac"},
    {SelectorKind::kArgoSmart, "argosmart"},
    {SelectorKind::kAlors, "alors"},
    {SelectorKind::kRidge, "ridge"},
    {SelectorKind::kOracle, "oracle"},
    {SelectorKind::kRandom, "random"},
};

json MatrixToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd MatrixFromJson(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) {
    throw DataError("matrix row count mismatch in selector file");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(data[r].size()) != cols) {
      throw DataError("ragged matrix in selector file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r][c].get<double>();
  }
  return m;
}

Eigen::VectorXd ToEigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

json MethodsToJson(const std::vector<MethodConfig>& methods) {
  json a = json::array();
  for (const auto& m : methods) a.push_back(MethodIndex(m));
  return a;
}

std::vector<MethodConfig> MethodsFromJson(const json& j) {
  std::vector<MethodConfig> out;
  for (const json& v : j) out.push_back(MethodFromIndex(v.get<int>()));
  return out;
}

std::vector<std::string> NeedTasks(const TrainingContext& ctx,
                                   std::size_t minimum) {
  if (ctx.tensor.num_tasks() < minimum) {
    throw DataError("selector needs at least " + std::to_string(minimum) +
                    " training tasks, tensor has " +
                    std::to_string(ctx.tensor.num_tasks()));
  }
  return ctx.tensor.tasks();
}

// Training task embeddings as rows.
Eigen::MatrixXd TaskMatrix(const TrainingContext& ctx) {
  const auto& f = *ctx.featurizer;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ctx.tensor.num_tasks()),
                    f.data_dim());
  for (std::size_t i = 0; i < ctx.tensor.num_tasks(); ++i) {
    EmbeddingVector e = f.TaskEmbedding(ctx.catalog.task(ctx.tensor.tasks()[i]));
    x.row(static_cast<Eigen::Index>(i)) = ToEigen(e.values).transpose();
  }
  return x;
}

// Mean runtime per (method, hardware) and per method over all hardware.
struct MeanTable {
  Eigen::MatrixXd by_hw;    // methods x hardware, kNoData where empty
  Eigen::VectorXd overall;  // methods

  json ToJson() const {
    return {{"by_hw", MatrixToJson(by_hw)},
            {"overall", std::vector<double>(overall.data(),
                                            overall.data() + overall.size())}};
  }
  static MeanTable FromJson(const json& j) {
    MeanTable t;
    t.by_hw = MatrixFromJson(j.at("by_hw"));
    t.overall = ToEigen(j.at("overall").get<std::vector<double>>());
    return t;
  }
};

// Averages over the tasks for which `include(i)` holds.
template <typename Pred>
MeanTable ComputeMeans(const PerformanceTensor& t, Pred include) {
  const auto m = static_cast<Eigen::Index>(t.num_methods());
  const auto h = static_cast<Eigen::Index>(t.num_hardware());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, h);
  Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(m, h);
  for (std::size_t i = 0; i < t.num_tasks(); ++i) {
    if (!include(i)) continue;
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k < h; ++k) {
        const auto& v = t.at(i, static_cast<std::size_t>(j),
                             static_cast<std::size_t>(k));
        if (v) {
          sum(j, k) += *v;
          cnt(j, k) += 1.0;
        }
      }
    }
  }
  MeanTable out;
  out.by_hw = Eigen::MatrixXd::Constant(m, h, kNoData);
  out.overall = Eigen::VectorXd::Constant(m, kNoData);
  for (Eigen::Index j = 0; j < m; ++j) {
    double s = 0.0;
    double c = 0.0;
    for (Eigen::Index k = 0; k < h; ++k) {
      if (cnt(j, k) > 0) out.by_hw(j, k) = sum(j, k) / cnt(j, k);
      s += sum(j, k);
      c += cnt(j, k);
    }
    if (c > 0) out.overall(j) = s / c;
  }
  return out;
}

std::optional<Eigen::Index> HardwareColumn(const std::vector<std::string>& ids,
                                           const std::string& id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<Eigen::Index>(it - ids.begin());
}

// Looks up a (method, hardware) mean, falling back to `fallback` and then to
// the per-method overall mean.
double Lookup(const MeanTable& table, Eigen::Index j,
              std::optional<Eigen::Index> k, const MeanTable* fallback) {
  if (k && table.by_hw(j, *k) != kNoData) return table.by_hw(j, *k);
  if (fallback) return Lookup(*fallback, j, k, nullptr);
  return table.overall(j);
}

json Container(SelectorKind kind, const std::vector<MethodConfig>& methods,
               const std::shared_ptr<const Featurizer>& featurizer,
               json state) {
  json j{{"format", "metainf.selector"},
         {"version", 1},
         {"kind", ToString(kind)},
         {"methods", MethodsToJson(methods)},
         {"state", std::move(state)}};
  if (featurizer) j["featurizer"] = featurizer->ToJson();
  return j;
}

// ---------------------------------------------------------------------------
// Regression-based selectors (MetaInf GBM and the ridge baseline).

template <typename Model>
class RegressionSelector : public Selector {
 public:
  RegressionSelector(SelectorKind kind, std::vector<MethodConfig> methods,
                     std::shared_ptr<const Featurizer> featurizer, Model model)
      : Selector(std::move(methods)),
        kind_(kind),
        featurizer_(std::move(featurizer)),
        model_(std::move(model)) {}

  SelectorKind kind() const override { return kind_; }
  const Model& model() const { return model_; }

  json ToJson() const override {
    return Container(kind_, methods(), featurizer_, model_.ToJson());
  }

 protected:
  std::vector<double> Score(const TaskProfile& task,
                            const HardwareProfile& hw) const override {
    const Featurizer& f = *featurizer_;
    const FeatureLayout layout = LayoutOf(f);
    const ModelProfile model = f.ResolveModel(task.model);
    EmbeddingVector d = f.TaskEmbedding(task);
    EmbeddingVector h = f.HardwareEmbedding(hw);
    std::vector<double> out;
    for (const MethodConfig& m : methods()) {
      EmbeddingVector me = f.ModelEmbedding(model, m);
      FeatureVector x =
          AssembleFeatures(layout, d.values, me.values, h.values, task, m, hw);
      out.push_back(model_.Predict(x));
    }
    return out;
  }

 private:
  SelectorKind kind_;
  std::shared_ptr<const Featurizer> featurizer_;
  Model model_;
};

// Feature rows for every present tensor cell, with embeddings computed once
// per entity.
std::vector<TrainingRow> BuildTrainingRows(const TrainingContext& ctx) {
  const PerformanceTensor& t = ctx.tensor;
  const Featurizer& f = *ctx.featurizer;
  const FeatureLayout layout = LayoutOf(f);
  std::vector<EmbeddingVector> task_emb;
  std::vector<TaskProfile> tasks;
  for (const auto& id : t.tasks()) {
    tasks.push_back(ctx.catalog.task(id));
    task_emb.push_back(f.TaskEmbedding(tasks.back()));
  }
  std::vector<HardwareProfile> hws;
  std::vector<EmbeddingVector> hw_emb;
  for (const auto& id : t.hardware()) {
    hws.push_back(ctx.catalog.hardware_profile(id));
    hw_emb.push_back(f.HardwareEmbedding(hws.back()));
  }
  std::map<std::pair<std::string, int>, EmbeddingVector> model_emb;
  std::vector<TrainingRow> rows;
  for (std::size_t i = 0; i < t.num_tasks(); ++i) {
    for (std::size_t j = 0; j < t.num_methods(); ++j) {
      const MethodConfig& m = t.methods()[j];
      auto key = std::make_pair(tasks[i].model, MethodIndex(m));
      auto it = model_emb.find(key);
      if (it == model_emb.end()) {
        it = model_emb
                 .emplace(key, f.ModelEmbedding(f.ResolveModel(tasks[i].model), m))
                 .first;
      }
      for (std::size_t k = 0; k < t.num_hardware(); ++k) {
        const auto& v = t.at(i, j, k);
        if (!v) continue;
        rows.push_back({AssembleFeatures(layout, task_emb[i].values,
                                         it->second.values, hw_emb[k].values,
                                         tasks[i], m, hws[k]),
                        *v});
      }
    }
  }
  if (rows.empty()) throw DataError("training tensor has no present cells");
  return rows;
}

// ---------------------------------------------------------------------------

class GlobalBestSelector : public Selector {
 public:
  GlobalBestSelector(std::vector<MethodConfig> methods,
                     std::vector<std::string> hardware, MeanTable means)
      : Selector(std::move(methods)),
        hardware_(std::move(hardware)),
        means_(std::move(means)) {}

  SelectorKind kind() const override { return SelectorKind::kGlobalBest; }

  json ToJson() const override {
    return Container(kind(), methods(), nullptr,
                     {{"hardware", hardware_}, {"means", means_.ToJson()}});
  }

 protected:
  std::vector<double> Score(const TaskProfile&,
                            const HardwareProfile& hw) const override {
    auto k = HardwareColumn(hardware_, hw.id);
    std::vector<double> out;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(methods().size()); ++j) {
      out.push_back(Lookup(means_, j, k, nullptr));
    }
    return out;
  }

 private:
  std::vector<std::string> hardware_;
  MeanTable means_;
};

class IsacSelector : public Selector {
 public:
  IsacSelector(std::vector<MethodConfig> methods,
               std::shared_ptr<const Featurizer> featurizer,
               std::vector<std::string> hardware, Eigen::MatrixXd centroids,
               std::vector<MeanTable> cluster_means, MeanTable global)
      : Selector(std::move(methods)),
        featurizer_(std::move(featurizer)),
        hardware_(std::move(hardware)),
        centroids_(std::move(centroids)),
        cluster_means_(std::move(cluster_means)),
        global_(std::move(global)) {}

  SelectorKind kind() const override { return SelectorKind::kIsac; }

  json ToJson() const override {
    json clusters = json::array();
    for (const auto& c : cluster_means_) clusters.push_back(c.ToJson());
    return Container(kind(), methods(), featurizer_,
                     {{"hardware", hardware_},
                      {"centroids", MatrixToJson(centroids_)},
                      {"clusters", clusters},
                      {"global", global_.ToJson()}});
  }

 protected:
  std::vector<double> Score(const TaskProfile& task,
                            const HardwareProfile& hw) const override {
    EmbeddingVector e = featurizer_->TaskEmbedding(task);
    const int c = NearestCentroid(centroids_, ToEigen(e.values));
    auto k = HardwareColumn(hardware_, hw.id);
    std::vector<double> out;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(methods().size()); ++j) {
      out.push_back(Lookup(cluster_means_[static_cast<std::size_t>(c)], j, k,
                           &global_));
    }
    return out;
  }

 private:
  std::shared_ptr<const Featurizer> featurizer_;
  std::vector<std::string> hardware_;
  Eigen::MatrixXd centroids_;
  std::vector<MeanTable> cluster_means_;
  MeanTable global_;
};

class ArgoSmartSelector : public Selector {
 public:
  ArgoSmartSelector(std::vector<MethodConfig> methods,
                    std::shared_ptr<const Featurizer> featurizer,
                    std::vector<std::string> hardware, int neighbors,
                    Eigen::MatrixXd task_points, std::vector<MeanTable> per_task,
                    MeanTable global)
      : Selector(std::move(methods)),
        featurizer_(std::move(featurizer)),
        hardware_(std::move(hardware)),
        neighbors_(neighbors),
        task_points_(std::move(task_points)),
        per_task_(std::move(per_task)),
        global_(std::move(global)) {}

  SelectorKind kind() const override { return SelectorKind::kArgoSmart; }

  json ToJson() const override {
    json tasks = json::array();
    for (const auto& t : per_task_) tasks.push_back(t.ToJson());
    return Container(kind(), methods(), featurizer_,
                     {{"hardware", hardware_},
                      {"neighbors", neighbors_},
                      {"task_points", MatrixToJson(task_points_)},
                      {"tasks", tasks},
                      {"global", global_.ToJson()}});
  }

 protected:
  std::vector<double> Score(const TaskProfile& task,
                            const HardwareProfile& hw) const override {
    Eigen::VectorXd q = ToEigen(featurizer_->TaskEmbedding(task).values);
    std::vector<std::pair<double, Eigen::Index>> dist;
    for (Eigen::Index i = 0; i < task_points_.rows(); ++i) {
      dist.emplace_back((task_points_.row(i).transpose() - q).squaredNorm(), i);
    }
    const auto k_nn = std::min<std::size_t>(static_cast<std::size_t>(neighbors_),
                                            dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_nn),
                      dist.end());
    auto k = HardwareColumn(hardware_, hw.id);
    std::vector<double> out(methods().size(), 0.0);
    for (std::size_t n = 0; n < k_nn; ++n) {
      const MeanTable& t = per_task_[static_cast<std::size_t>(dist[n].second)];
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(out.size()); ++j) {
        double v = Lookup(t, j, k, &global_);
        out[static_cast<std::size_t>(j)] +=
            v == kNoData ? kNoData / static_cast<double>(k_nn)
                         : v / static_cast<double>(k_nn);
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const Featurizer> featurizer_;
  std::vector<std::string> hardware_;
  int neighbors_;
  Eigen::MatrixXd task_points_;
  std::vector<MeanTable> per_task_;
  MeanTable global_;
};

// Latent factors of log runtimes over (method, hardware) columns plus a
// linear cold-start map from task embeddings to task factors.
class AlorsSelector : public Selector {
 public:
  struct State {
    std::vector<std::string> hardware;
    Eigen::VectorXd column_means;    // m*h, index j*h + k
    Eigen::MatrixXd column_factors;  // m*h x r
    Eigen::MatrixXd map_weights;     // data_dim x r
    Eigen::VectorXd input_mean;      // data_dim
    Eigen::VectorXd factor_mean;     // r
    Eigen::VectorXd column_present;  // 1 where any training data exists
    double loss = 0.0;
    int epochs = 0;
  };

  AlorsSelector(std::vector<MethodConfig> methods,
                std::shared_ptr<const Featurizer> featurizer, State state)
      : Selector(std::move(methods)),
        featurizer_(std::move(featurizer)),
        s_(std::move(state)) {}

  SelectorKind kind() const override { return SelectorKind::kAlors; }

  json ToJson() const override {
    auto vec = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    return Container(kind(), methods(), featurizer_,
                     {{"hardware", s_.hardware},
                      {"column_means", vec(s_.column_means)},
                      {"column_factors", MatrixToJson(s_.column_factors)},
                      {"map_weights", MatrixToJson(s_.map_weights)},
                      {"input_mean", vec(s_.input_mean)},
                      {"factor_mean", vec(s_.factor_mean)},
                      {"column_present", vec(s_.column_present)},
                      {"loss", s_.loss},
                      {"epochs", s_.epochs}});
  }

  static State StateFromJson(const json& j) {
    auto vec = [&](const char* k) {
      return ToEigen(j.at(k).get<std::vector<double>>());
    };
    State s;
    s.hardware = j.at("hardware").get<std::vector<std::string>>();
    s.column_means = vec("column_means");
    s.column_factors = MatrixFromJson(j.at("column_factors"));
    s.map_weights = MatrixFromJson(j.at("map_weights"));
    s.input_mean = vec("input_mean");
    s.factor_mean = vec("factor_mean");
    s.column_present = vec("column_present");
    s.loss = j.at("loss").get<double>();
    s.epochs = j.at("epochs").get<int>();
    return s;
  }

 protected:
  std::vector<double> Score(const TaskProfile& task,
                            const HardwareProfile& hw) const override {
    Eigen::VectorXd x = ToEigen(featurizer_->TaskEmbedding(task).values);
    Eigen::VectorXd u =
        s_.map_weights.transpose() * (x - s_.input_mean) + s_.factor_mean;
    Eigen::VectorXd y = s_.column_means + s_.column_factors * u;
    const auto h = static_cast<Eigen::Index>(s_.hardware.size());
    auto k = HardwareColumn(s_.hardware, hw.id);
    std::vector<double> out;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(methods().size()); ++j) {
      double sum = 0.0;
      int n = 0;
      for (Eigen::Index c = 0; c < h; ++c) {
        if (k && c != *k) continue;
        if (s_.column_present(j * h + c) == 0.0) continue;
        sum += y(j * h + c);
        ++n;
      }
      if (n == 0 && k) {
        // Queried hardware never saw this method; average the others.
        for (Eigen::Index c = 0; c < h; ++c) {
          if (s_.column_present(j * h + c) == 0.0) continue;
          sum += y(j * h + c);
          ++n;
        }
      }
      out.push_back(n == 0 ? kNoData
                           : std::max(std::exp(sum / n), kMinPredictedRuntime));
    }
    return out;
  }

 private:
  std::shared_ptr<const Featurizer> featurizer_;
  State s_;
};

class OracleSelector : public Selector {
 public:
  OracleSelector(std::vector<MethodConfig> methods, TruthFunction truth,
                 json descriptor)
      : Selector(std::move(methods)),
        truth_(std::move(truth)),
        descriptor_(std::move(descriptor)) {}

  SelectorKind kind() const override { return SelectorKind::kOracle; }

  json ToJson() const override {
    if (descriptor_.is_null()) return Selector::ToJson();
    return Container(kind(), methods(), nullptr,
                     {{"descriptor", descriptor_}});
  }

 protected:
  std::vector<double> Score(const TaskProfile& task,
                            const HardwareProfile& hw) const override {
    std::vector<double> out;
    for (const auto& m : methods()) out.push_back(truth_(task, m, hw));
    return out;
  }

 private:
  TruthFunction truth_;
  json descriptor_;
};

class RandomSelector : public Selector {
 public:
  RandomSelector(std::vector<MethodConfig> methods, uint64_t seed)
      : Selector(std::move(methods)), seed_(seed) {}

  SelectorKind kind() const override { return SelectorKind::kRandom; }

 protected:
  std::vector<double> Score(const TaskProfile& task,
                            const HardwareProfile& hw) const override {
    std::string digest = Sha256Hex(task.id + '\0' + hw.id + '\0' +
                                   std::to_string(seed_));
    std::mt19937_64 gen(std::stoull(digest.substr(0, 16), nullptr, 16));
    std::vector<double> out(methods().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(i + 1);
    for (std::size_t i = out.size(); i > 1; --i) {
      std::swap(out[i - 1], out[rng::Index(gen, i)]);
    }
    return out;
  }

 private:
  uint64_t seed_;
};

// ---------------------------------------------------------------------------

std::shared_ptr<const Selector> FitIsac(const SelectorSpec& spec,
                                        const TrainingContext& ctx) {
  NeedTasks(ctx, static_cast<std::size_t>(std::max(2, spec.isac_clusters)));
  Eigen::MatrixXd x = TaskMatrix(ctx);
  KMeansResult km = KMeans(x, spec.isac_clusters, spec.isac_restarts,
                           spec.isac_max_iterations, spec.seed);
  std::vector<MeanTable> clusters;
  for (int c = 0; c < spec.isac_clusters; ++c) {
    clusters.push_back(ComputeMeans(ctx.tensor, [&](std::size_t i) {
      return km.assignment[i] == c;
    }));
  }
  MeanTable global = ComputeMeans(ctx.tensor, [](std::size_t) { return true; });
  return std::make_shared<IsacSelector>(ctx.tensor.methods(), ctx.featurizer,
                                        ctx.tensor.hardware(), km.centroids,
                                        std::move(clusters), std::move(global));
}

std::shared_ptr<const Selector> FitArgoSmart(const SelectorSpec& spec,
                                             const TrainingContext& ctx) {
  NeedTasks(ctx, 2);
  Eigen::MatrixXd x = TaskMatrix(ctx);
  std::vector<MeanTable> per_task;
  for (std::size_t t = 0; t < ctx.tensor.num_tasks(); ++t) {
    per_task.push_back(
        ComputeMeans(ctx.tensor, [t](std::size_t i) { return i == t; }));
  }
  MeanTable global = ComputeMeans(ctx.tensor, [](std::size_t) { return true; });
  return std::make_shared<ArgoSmartSelector>(
      ctx.tensor.methods(), ctx.featurizer, ctx.tensor.hardware(),
      spec.argosmart_neighbors, std::move(x), std::move(per_task),
      std::move(global));
}

std::shared_ptr<const Selector> FitAlors(const SelectorSpec& spec,
                                         const TrainingContext& ctx) {
  NeedTasks(ctx, 2);
  const PerformanceTensor& t = ctx.tensor;
  const auto n = static_cast<Eigen::Index>(t.num_tasks());
  const auto m = static_cast<Eigen::Index>(t.num_methods());
  const auto h = static_cast<Eigen::Index>(t.num_hardware());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, m * h);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(n, m * h);
  mask.setConstant(false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k < h; ++k) {
        const auto& v = t.at(static_cast<std::size_t>(i),
                             static_cast<std::size_t>(j),
                             static_cast<std::size_t>(k));
        if (v) {
          y(i, j * h + k) = std::log(*v);
          mask(i, j * h + k) = true;
        }
      }
    }
  }
  AlorsSelector::State s;
  s.hardware = t.hardware();
  s.column_means = Eigen::VectorXd::Zero(m * h);
  s.column_present = Eigen::VectorXd::Zero(m * h);
  for (Eigen::Index c = 0; c < m * h; ++c) {
    double sum = 0.0;
    int cnt = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask(i, c)) {
        sum += y(i, c);
        ++cnt;
      }
    }
    if (cnt > 0) {
      s.column_means(c) = sum / cnt;
      s.column_present(c) = 1.0;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask(i, c)) y(i, c) -= s.column_means(c);
    }
  }
  AlsResult als = FactorizeAls(y, mask, spec.alors_rank,
                               spec.alors_regularization, spec.alors_epochs,
                               spec.alors_tolerance, spec.seed);
  s.column_factors = als.col_factors;
  s.loss = als.loss;
  s.epochs = als.epochs;

  // Ridge map from task embeddings to task factors.
  Eigen::MatrixXd x = TaskMatrix(ctx);
  s.input_mean = x.colwise().mean().transpose();
  s.factor_mean = als.row_factors.colwise().mean().transpose();
  Eigen::MatrixXd xc = x.rowwise() - s.input_mean.transpose();
  Eigen::MatrixXd uc = als.row_factors.rowwise() - s.factor_mean.transpose();
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd stacked(n + d, d);
  stacked.topRows(n) = xc;
  stacked.bottomRows(d) =
      std::sqrt(spec.ridge_lambda) * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + d, uc.cols());
  rhs.topRows(n) = uc;
  s.map_weights = stacked.colPivHouseholderQr().solve(rhs);
  return std::make_shared<AlorsSelector>(t.methods(), ctx.featurizer,
                                         std::move(s));
}

void RequireFeaturizer(const TrainingContext& ctx, SelectorKind kind) {
  if (!ctx.featurizer) {
    throw UsageError(std::string(ToString(kind)) +
                     " selector needs a fitted featurizer");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

const char* ToString(SelectorKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<SelectorKind> ParseSelectorKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  return std::nullopt;
}

void SelectorSpec::Validate() const {
  gbm.Validate();
  auto positive = [](int v, const char* what) {
    if (v < 1) throw UsageError(std::string(what) + " must be >= 1");
  };
  positive(isac_clusters, "isac cluster count");
  positive(isac_restarts, "isac restarts");
  positive(isac_max_iterations, "isac max iterations");
  positive(argosmart_neighbors, "argosmart neighbor count");
  positive(alors_rank, "alors rank");
  positive(alors_epochs, "alors epochs");
  if (!(alors_regularization >= 0.0) || !(alors_tolerance > 0.0)) {
    throw UsageError("alors regularization must be >= 0 and tolerance > 0");
  }
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) {
    throw UsageError("ridge lambda must be a finite value >= 0");
  }
}

json SelectorSpec::ToJson() const {
  return {{"kind", ToString(kind)},
          {"gbm", gbm.ToJson()},
          {"isac_clusters", isac_clusters},
          {"isac_restarts", isac_restarts},
          {"isac_max_iterations", isac_max_iterations},
          {"argosmart_neighbors", argosmart_neighbors},
          {"alors_rank", alors_rank},
          {"alors_epochs", alors_epochs},
          {"alors_regularization", alors_regularization},
          {"alors_tolerance", alors_tolerance},
          {"ridge_lambda", ridge_lambda},
          {"seed", seed}};
}

SelectorSpec SelectorSpec::FromJson(const json& j) {
  SelectorSpec s;
  auto kind = ParseSelectorKind(j.value("kind", "metainf"));
  if (!kind) throw UsageError("unknown selector kind");
  s.kind = *kind;
  if (j.contains("gbm")) s.gbm = GbmHyperparams::FromJson(j.at("gbm"));
  s.isac_clusters = j.value("isac_clusters", s.isac_clusters);
  s.isac_restarts = j.value("isac_restarts", s.isac_restarts);
  s.isac_max_iterations = j.value("isac_max_iterations", s.isac_max_iterations);
  s.argosmart_neighbors = j.value("argosmart_neighbors", s.argosmart_neighbors);
  s.alors_rank = j.value("alors_rank", s.alors_rank);
  s.alors_epochs = j.value("alors_epochs", s.alors_epochs);
  s.alors_regularization =
      j.value("alors_regularization", s.alors_regularization);
  s.alors_tolerance = j.value("alors_tolerance", s.alors_tolerance);
  s.ridge_lambda = j.value("ridge_lambda", s.ridge_lambda);
  s.seed = j.value("seed", s.seed);
  s.Validate();
  return s;
}

std::vector<RankedMethod> SortRanking(std::vector<RankedMethod> ranking) {
  std::sort(ranking.begin(), ranking.end(),
            [](const RankedMethod& a, const RankedMethod& b) {
              if (a.predicted_runtime_s != b.predicted_runtime_s) {
                return a.predicted_runtime_s < b.predicted_runtime_s;
              }
              return MethodIndex(a.method) < MethodIndex(b.method);
            });
  return ranking;
}

std::vector<RankedMethod> Selector::RankMethods(const TaskProfile& task,
                                                const HardwareProfile& hw) const {
  std::vector<double> scores = Score(task, hw);
  if (scores.size() != methods_.size()) {
    throw IntegrityError("selector produced " + std::to_string(scores.size()) +
                         " scores for " + std::to_string(methods_.size()) +
                         " methods");
  }
  std::vector<RankedMethod> ranking;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double s = std::isnan(scores[i]) ? kNoData : scores[i];
    ranking.push_back({methods_[i], s});
  }
  return SortRanking(std::move(ranking));
}

json Selector::ToJson() const {
  throw UsageError(std::string(ToString(kind())) +
                   " selector is evaluation-only and cannot be saved");
}

std::shared_ptr<const Selector> FitSelector(const SelectorSpec& spec,
                                            const TrainingContext& ctx) {
  spec.Validate();
  if (spec.kind != SelectorKind::kGlobalBest) RequireFeaturizer(ctx, spec.kind);
  switch (spec.kind) {
    case SelectorKind::kMetaInf: {
      NeedTasks(ctx, 1);
      auto rows = BuildTrainingRows(ctx);
      return std::make_shared<RegressionSelector<GbmModel>>(
          spec.kind, ctx.tensor.methods(), ctx.featurizer,
          TrainGbm(rows, spec.gbm));
    }
    case SelectorKind::kRidge: {
      NeedTasks(ctx, 1);
      auto rows = BuildTrainingRows(ctx);
      return std::make_shared<RegressionSelector<RidgeModel>>(
          spec.kind, ctx.tensor.methods(), ctx.featurizer,
          TrainRidge(rows, spec.ridge_lambda, TargetTransform::kLog));
    }
    case SelectorKind::kGlobalBest:
      NeedTasks(ctx, 1);
      return std::make_shared<GlobalBestSelector>(
          ctx.tensor.methods(), ctx.tensor.hardware(),
          ComputeMeans(ctx.tensor, [](std::size_t) { return true; }));
    case SelectorKind::kIsac:
      return FitIsac(spec, ctx);
    case SelectorKind::kArgoSmart:
      return FitArgoSmart(spec, ctx);
    case SelectorKind::kAlors:
      return FitAlors(spec, ctx);
    case SelectorKind::kOracle:
    case SelectorKind::kRandom:
      break;
  }
  throw UsageError(std::string(ToString(spec.kind)) +
                   " is evaluation-only and cannot be fitted from records");
}

std::shared_ptr<const Selector> LoadSelector(
    const json& j, std::shared_ptr<EmbeddingProvider> provider,
    const OracleFactory& oracle_factory) {
  if (j.value("format", "") != "metainf.selector" || j.value("version", -1) != 1) {
    throw DataError("not a selector file or unsupported version");
  }
  auto kind = ParseSelectorKind(j.at("kind").get<std::string>());
  if (!kind) throw DataError("unknown selector kind in selector file");
  auto methods = MethodsFromJson(j.at("methods"));
  const json& s = j.at("state");
  std::shared_ptr<const Featurizer> f;
  if (j.contains("featurizer")) f = Featurizer::FromJson(j.at("featurizer"), provider);
  auto need_f = [&] {
    if (!f) throw DataError("selector file lacks its featurizer");
  };
  auto hw = [&] { return s.at("hardware").get<std::vector<std::string>>(); };

  switch (*kind) {
    case SelectorKind::kMetaInf:
      need_f();
      return std::make_shared<RegressionSelector<GbmModel>>(
          *kind, methods, f, GbmModel::FromJson(s));
    case SelectorKind::kRidge:
      need_f();
      return std::make_shared<RegressionSelector<RidgeModel>>(
          *kind, methods, f, RidgeModel::FromJson(s));
    case SelectorKind::kGlobalBest:
      return std::make_shared<GlobalBestSelector>(
          methods, hw(), MeanTable::FromJson(s.at("means")));
    case SelectorKind::kIsac: {
      need_f();
      std::vector<MeanTable> clusters;
      for (const json& c : s.at("clusters")) clusters.push_back(MeanTable::FromJson(c));
      return std::make_shared<IsacSelector>(
          methods, f, hw(), MatrixFromJson(s.at("centroids")),
          std::move(clusters), MeanTable::FromJson(s.at("global")));
    }
    case SelectorKind::kArgoSmart: {
      need_f();
      std::vector<MeanTable> tasks;
      for (const json& t : s.at("tasks")) tasks.push_back(MeanTable::FromJson(t));
      return std::make_shared<ArgoSmartSelector>(
          methods, f, hw(), s.at("neighbors").get<int>(),
          MatrixFromJson(s.at("task_points")), std::move(tasks),
          MeanTable::FromJson(s.at("global")));
    }
    case SelectorKind::kAlors:
      need_f();
      return std::make_shared<AlorsSelector>(methods, f,
                                             AlorsSelector::StateFromJson(s));
    case SelectorKind::kOracle:
      if (!oracle_factory) {
        throw UsageError("oracle snapshot needs an oracle factory to load");
      }
      return oracle_factory(s.at("descriptor"));
    case SelectorKind::kRandom:
      break;
  }
  throw DataError("selector kind cannot be loaded");
}

std::shared_ptr<const Selector> MakeOracleSelector(
    std::vector<MethodConfig> methods, TruthFunction truth, json descriptor) {
  return std::make_shared<OracleSelector>(std::move(methods), std::move(truth),
                                          std::move(descriptor));
}

std::shared_ptr<const Selector> MakeTensorOracle(PerformanceTensor truth) {
  auto t = std::make_shared<const PerformanceTensor>(std::move(truth));
  return MakeOracleSelector(
      t->methods(), [t](const TaskProfile& task, const MethodConfig& m,
                        const HardwareProfile& hw) {
        auto i = t->task_index(task.id);
        auto j = t->method_position(m);
        auto k = t->hardware_index(hw.id);
        if (!i || !j || !k || !t->at(*i, *j, *k)) {
          throw DataError("no ground truth for (" + task.id + ", " +
                          MethodName(m) + ", " + hw.id + ")");
        }
        return *t->at(*i, *j, *k);
      });
}

std::shared_ptr<const Selector> MakeRandomSelector(
    std::vector<MethodConfig> methods, uint64_t seed) {
  return std::make_shared<RandomSelector>(std::move(methods), seed);
}

// ---------------------------------------------------------------------------

int NearestCentroid(const Eigen::MatrixXd& centroids,
                    const Eigen::VectorXd& point) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    double d = (centroids.row(c).transpose() - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult KMeans(const Eigen::MatrixXd& points, int clusters, int restarts,
                    int max_iterations, uint64_t seed) {
  const auto n = points.rows();
  if (clusters < 1 || restarts < 1 || max_iterations < 1) {
    throw UsageError("k-means parameters must be >= 1");
  }
  if (n < clusters) {
    throw DataError("k-means needs at least " + std::to_string(clusters) +
                    " points, got " + std::to_string(n));
  }
  std::mt19937_64 gen(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    // Distinct random points as initial centroids (partial Fisher-Yates).
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int c = 0; c < clusters; ++c) {
      auto pick = c + static_cast<Eigen::Index>(
                          rng::Index(gen, static_cast<uint64_t>(n - c)));
      std::swap(order[static_cast<std::size_t>(c)],
                order[static_cast<std::size_t>(pick)]);
    }
    Eigen::MatrixXd cent(clusters, points.cols());
    for (int c = 0; c < clusters; ++c) {
      cent.row(c) = points.row(order[static_cast<std::size_t>(c)]);
    }
    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iterations; ++it) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int a = NearestCentroid(cent, points.row(i).transpose());
        if (a != assign[static_cast<std::size_t>(i)]) {
          assign[static_cast<std::size_t>(i)] = a;
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(clusters, points.cols());
      std::vector<int> count(static_cast<std::size_t>(clusters), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sum.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
        ++count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < clusters; ++c) {
        if (count[static_cast<std::size_t>(c)] > 0) {
          cent.row(c) = sum.row(c) / count[static_cast<std::size_t>(c)];
          continue;
        }
        // Empty cluster: move it to the point farthest from its centroid.
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          double d = (points.row(i) -
                      cent.row(assign[static_cast<std::size_t>(i)]))
                         .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        cent.row(c) = points.row(far);
        assign[static_cast<std::size_t>(far)] = c;
      }
    }
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int a = NearestCentroid(cent, points.row(i).transpose());
      assign[static_cast<std::size_t>(i)] = a;
      inertia += (points.row(i) - cent.row(a)).squaredNorm();
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.centroids = cent;
      best.assignment = assign;
    }
  }
  return best;
}

AlsResult FactorizeAls(
    const Eigen::MatrixXd& values,
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask, int rank,
    double regularization, int max_epochs, double tolerance, uint64_t seed) {
  const auto n = values.rows();
  const auto c = values.cols();
  if (mask.rows() != n || mask.cols() != c) {
    throw DataError("ALS mask shape does not match the value matrix");
  }
  if (rank < 1 || max_epochs < 1) throw UsageError("ALS rank and epochs must be >= 1");
  std::mt19937_64 gen(seed);
  AlsResult r;
  r.row_factors.resize(n, rank);
  r.col_factors.resize(c, rank);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < rank; ++k) r.row_factors(i, k) = 0.1 * rng::StandardNormal(gen);
  for (Eigen::Index i = 0; i < c; ++i)
    for (int k = 0; k < rank; ++k) r.col_factors(i, k) = 0.1 * rng::StandardNormal(gen);

  const Eigen::MatrixXd reg = regularization * Eigen::MatrixXd::Identity(rank, rank);
  // Ridge-regularized least squares for one factor row given the other side.
  auto solve = [&](Eigen::MatrixXd& target, const Eigen::MatrixXd& other,
                   bool by_row) {
    const auto count = by_row ? n : c;
    for (Eigen::Index a = 0; a < count; ++a) {
      Eigen::MatrixXd lhs = reg;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rank);
      const auto other_count = by_row ? c : n;
      for (Eigen::Index b = 0; b < other_count; ++b) {
        bool present = by_row ? mask(a, b) : mask(b, a);
        if (!present) continue;
        double v = by_row ? values(a, b) : values(b, a);
        lhs.noalias() += other.row(b).transpose() * other.row(b);
        rhs.noalias() += v * other.row(b).transpose();
      }
      target.row(a) = lhs.ldlt().solve(rhs).transpose();
    }
  };
  auto loss = [&] {
    double sse = 0.0;
    double scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        if (!mask(i, j)) continue;
        double e = values(i, j) - r.row_factors.row(i).dot(r.col_factors.row(j));
        sse += e * e;
        scale += values(i, j) * values(i, j);
      }
    }
    return std::make_pair(sse + regularization * (r.row_factors.squaredNorm() +
                                                  r.col_factors.squaredNorm()),
                          scale);
  };

  double prev = loss().first;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    solve(r.row_factors, r.col_factors, true);
    solve(r.col_factors, r.row_factors, false);
    auto [cur, scale] = loss();
    r.loss = cur;
    r.epochs = epoch;
    if (std::abs(prev - cur) <= tolerance * std::max(prev, 1e-300) ||
        cur <= 1e-24 * std::max(scale, 1.0)) {
      return r;
    }
    prev = cur;
  }
  throw DataError("ALS did not converge in " + std::to_string(max_epochs) +
                  " epochs (last loss " + std::to_string(r.loss) + ")");
}

}  // namespace metainf
