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

#include "metainf/gbm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "metainf/error.h"

namespace metainf {

using nlohmann::json;

void GbmHyperparams::Validate() const {
  if (n_rounds < 1) throw UsageError("n_rounds must be >= 1");
  if (max_depth < 1) throw UsageError("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw UsageError("learning_rate must be in (0, 1]");
  }
  if (min_samples_leaf < 1) throw UsageError("min_samples_leaf must be >= 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) {
    throw UsageError("subsample must be in (0, 1]");
  }
}

json GbmHyperparams::ToJson() const {
  return {{"n_rounds", n_rounds},
          {"max_depth", max_depth},
          {"learning_rate", learning_rate},
          {"min_samples_leaf", min_samples_leaf},
          {"subsample", subsample},
          {"seed", seed},
          {"target_transform", ToString(target_transform)}};
}

GbmHyperparams GbmHyperparams::FromJson(const json& j) {
  GbmHyperparams hp;
  hp.n_rounds = j.value("n_rounds", hp.n_rounds);
  hp.max_depth = j.value("max_depth", hp.max_depth);
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.min_samples_leaf = j.value("min_samples_leaf", hp.min_samples_leaf);
  hp.subsample = j.value("subsample", hp.subsample);
  hp.seed = j.value("seed", hp.seed);
  hp.target_transform =
      ParseTargetTransform(j.value("target_transform", std::string("log")));
  hp.Validate();
  return hp;
}

double RegressionTree::Predict(std::span<const double> x) const {
  int n = 0;
  while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
    const Node& node = nodes[static_cast<std::size_t>(n)];
    n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                    : node.right;
  }
  return nodes[static_cast<std::size_t>(n)].value;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> depth(nodes.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    if (node.feature < 0) continue;
    for (int child : {node.left, node.right}) {
      depth[static_cast<std::size_t>(child)] = depth[i] + 1;
      max_depth = std::max(max_depth, depth[i] + 1);
    }
  }
  return max_depth;
}

double GbmModel::PredictTransformed(std::span<const double> x) const {
  double sum = 0.0;
  for (const RegressionTree& tree : trees) sum += tree.Predict(x);
  return base_prediction + hyperparams.learning_rate * sum;
}

double GbmModel::Predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != layout.size()) {
    throw DataError("feature vector has " + std::to_string(x.size()) +
                    " entries, model layout expects " +
                    std::to_string(layout.size()));
  }
  double t = PredictTransformed(x);
  double y = target_transform() == TargetTransform::kLog ? std::exp(t) : t;
  if (std::isnan(y)) y = kMinPredictedRuntime;
  return std::clamp(y, kMinPredictedRuntime,
                    std::numeric_limits<double>::max());
}

double GbmModel::Predict(const FeatureVector& x) const {
  if (!(x.layout == layout)) {
    throw DataError("feature layout does not match the model layout");
  }
  return Predict(std::span<const double>(x.values));
}

json GbmModel::ToJson() const {
  json j;
  j["format"] = "metainf.gbm";
  j["version"] = kFormatVersion;
  j["layout"] = layout.ToJson();
  j["hyperparams"] = hyperparams.ToJson();
  j["base_prediction"] = base_prediction;
  j["trees"] = json::array();
  for (const RegressionTree& tree : trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value,
                       n.samples});
    }
    j["trees"].push_back(std::move(nodes));
  }
  return j;
}

GbmModel GbmModel::FromJson(const json& j) {
  if (j.value("format", "") != "metainf.gbm" ||
      j.value("version", -1) != kFormatVersion) {
    throw DataError("not a GBM model or unsupported version");
  }
  GbmModel m;
  m.layout = FeatureLayout::FromJson(j.at("layout"));
  m.hyperparams = GbmHyperparams::FromJson(j.at("hyperparams"));
  m.base_prediction = j.at("base_prediction").get<double>();
  for (const json& nodes : j.at("trees")) {
    RegressionTree tree;
    for (const json& n : nodes) {
      RegressionTree::Node node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<double>();
      node.left = n.at(2).get<int>();
      node.right = n.at(3).get<int>();
      node.value = n.at(4).get<double>();
      node.samples = n.at(5).get<int>();
      tree.nodes.push_back(node);
    }
    const int count = static_cast<int>(tree.nodes.size());
    for (const auto& node : tree.nodes) {
      if (node.feature >= m.layout.size() ||
          (node.feature >= 0 && (node.left <= 0 || node.left >= count ||
                                 node.right <= 0 || node.right >= count))) {
        throw DataError("corrupt tree in GBM model file");
      }
    }
    if (tree.nodes.empty()) throw DataError("empty tree in GBM model file");
    m.trees.push_back(std::move(tree));
  }
  return m;
}

namespace {

struct Matrix {
  std::span<const double> data;
  std::size_t rows;
  std::size_t cols;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return data.subspan(r * cols, cols);
  }
};

struct NodeStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  int count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Grows one tree level by level with exact greedy variance-reduction splits.
// `presorted[f]` lists all rows ordered by feature f; rows outside `in_tree`
// are skipped.
RegressionTree GrowTree(const Matrix& x, std::span<const double> residual,
                        const std::vector<std::vector<uint32_t>>& presorted,
                        const std::vector<uint32_t>& sampled,
                        const GbmHyperparams& hp) {
  const std::size_t n = x.rows;
  const int min_leaf = hp.min_samples_leaf;
  RegressionTree tree;
  std::vector<NodeStats> stats;
  std::vector<int> node_of(n, -1);

  NodeStats root;
  for (uint32_t r : sampled) {
    node_of[r] = 0;
    root.sum += residual[r];
    root.sum_sq += residual[r] * residual[r];
    ++root.count;
  }
  tree.nodes.push_back({});
  stats.push_back(root);

  std::vector<int> frontier = {0};
  for (int depth = 0; depth < hp.max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot_of(tree.nodes.size(), -1);
    std::vector<int> active;
    for (int node : frontier) {
      if (stats[static_cast<std::size_t>(node)].count >= 2 * min_leaf) {
        slot_of[static_cast<std::size_t>(node)] = static_cast<int>(active.size());
        active.push_back(node);
      }
    }
    if (active.empty()) break;

    const std::size_t slots = active.size();
    std::vector<SplitCandidate> best(slots);
    std::vector<double> min_gain(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      const NodeStats& st = stats[static_cast<std::size_t>(active[s])];
      double sse = st.sum_sq - st.sum * st.sum / st.count;
      min_gain[s] = std::max(1e-13 * st.sum_sq, 1e-300);
      best[s].gain = sse > 0.0 ? min_gain[s] : std::numeric_limits<double>::infinity();
    }

    std::vector<double> left_sum(slots);
    std::vector<int> left_count(slots);
    std::vector<double> last_value(slots);
    for (std::size_t f = 0; f < x.cols; ++f) {
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_count.begin(), left_count.end(), 0);
      for (uint32_t r : presorted[f]) {
        int node = node_of[r];
        if (node < 0) continue;
        int s = slot_of[static_cast<std::size_t>(node)];
        if (s < 0) continue;
        const double v = x.at(r, f);
        const int n_left = left_count[static_cast<std::size_t>(s)];
        if (n_left > 0 && v != last_value[static_cast<std::size_t>(s)]) {
          const NodeStats& st = stats[static_cast<std::size_t>(node)];
          const int n_right = st.count - n_left;
          if (n_left >= min_leaf && n_right >= min_leaf) {
            const double sl = left_sum[static_cast<std::size_t>(s)];
            const double sr = st.sum - sl;
            const double gain = sl * sl / n_left + sr * sr / n_right -
                                st.sum * st.sum / st.count;
            SplitCandidate& b = best[static_cast<std::size_t>(s)];
            if (gain > b.gain) {
              b.gain = gain;
              b.feature = static_cast<int>(f);
              b.threshold = last_value[static_cast<std::size_t>(s)];
            }
          }
        }
        left_sum[static_cast<std::size_t>(s)] += residual[r];
        ++left_count[static_cast<std::size_t>(s)];
        last_value[static_cast<std::size_t>(s)] = v;
      }
    }

    std::vector<int> next;
    std::vector<int> split_left(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < slots; ++s) {
      if (best[s].feature < 0) continue;
      const int node = active[s];
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      stats.push_back({});
      stats.push_back({});
      auto& parent = tree.nodes[static_cast<std::size_t>(node)];
      parent.feature = best[s].feature;
      parent.threshold = best[s].threshold;
      parent.left = left;
      parent.right = left + 1;
      split_left[static_cast<std::size_t>(node)] = left;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;
    for (uint32_t r : sampled) {
      const int node = node_of[r];
      const int left = split_left[static_cast<std::size_t>(node)];
      if (left < 0) continue;
      const auto& parent = tree.nodes[static_cast<std::size_t>(node)];
      const int child =
          x.at(r, static_cast<std::size_t>(parent.feature)) <= parent.threshold
              ? left
              : left + 1;
      node_of[r] = child;
      NodeStats& st = stats[static_cast<std::size_t>(child)];
      st.sum += residual[r];
      st.sum_sq += residual[r] * residual[r];
      ++st.count;
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    auto& node = tree.nodes[i];
    node.samples = stats[i].count;
    if (node.feature < 0) {
      node.value = stats[i].count > 0 ? stats[i].sum / stats[i].count : 0.0;
    }
  }
  return tree;
}

}  // namespace

GbmModel TrainGbm(std::span<const double> features,
                  std::span<const double> targets, const FeatureLayout& layout,
                  const GbmHyperparams& hp) {
  hp.Validate();
  const std::size_t d = static_cast<std::size_t>(layout.size());
  const std::size_t n = targets.size();
  if (n < 2) throw DataError("GBM training needs at least 2 rows");
  if (features.size() != n * d) {
    throw DataError("feature matrix size does not match rows x layout");
  }
  for (double y : targets) {
    if (!std::isfinite(y)) throw DataError("non-finite training target");
    if (hp.target_transform == TargetTransform::kLog && !(y > 0.0)) {
      throw DataError("log target transform needs positive targets");
    }
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }

  // Canonical row order: lexicographic by features, then target.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = features.subspan(a * d, d);
    auto rb = features.subspan(b * d, d);
    int cmp = std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())
                  ? -1
                  : (std::lexicographical_compare(rb.begin(), rb.end(),
                                                  ra.begin(), ra.end())
                         ? 1
                         : 0);
    if (cmp != 0) return cmp < 0;
    return targets[a] < targets[b];
  });
  std::vector<double> x_data(n * d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(order[i] * d), d,
                x_data.begin() + static_cast<std::ptrdiff_t>(i * d));
    double t = targets[order[i]];
    y[i] = hp.target_transform == TargetTransform::kLog ? std::log(t) : t;
  }
  Matrix x{x_data, n, d};

  std::vector<std::vector<uint32_t>> presorted(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& idx = presorted[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
      return x.at(a, f) < x.at(b, f);
    });
  }

  GbmModel model;
  model.layout = layout;
  model.hyperparams = hp;
  model.base_prediction = std::accumulate(y.begin(), y.end(), 0.0) / n;

  std::vector<double> pred(n, model.base_prediction);
  std::vector<double> residual(n);
  auto loss = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return s / n;
  };
  model.round_losses.push_back(loss());

  std::vector<uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  std::mt19937_64 rng(hp.seed);
  const std::size_t sample_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hp.subsample * n)));

  for (int round = 0; round < hp.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    std::vector<uint32_t> sampled;
    if (sample_size >= n) {
      sampled = all_rows;
    } else {
      std::vector<uint32_t> pool = all_rows;
      for (std::size_t i = 0; i < sample_size; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(pool[i], pool[j]);
      }
      sampled.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sample_size));
      std::sort(sampled.begin(), sampled.end());
    }
    RegressionTree tree = GrowTree(x, residual, presorted, sampled, hp);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += hp.learning_rate * tree.Predict(x.row(i));
    }
    model.trees.push_back(std::move(tree));
    model.round_losses.push_back(loss());
  }
  return model;
}

GbmModel TrainGbm(std::span<const TrainingRow> rows, const GbmHyperparams& hp) {
  if (rows.size() < 2) throw DataError("GBM training needs at least 2 rows");
  const FeatureLayout layout = rows.front().x.layout;
  const std::size_t d = static_cast<std::size_t>(layout.size());
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(rows.size() * d);
  y.reserve(rows.size());
  for (const TrainingRow& row : rows) {
    if (!(row.x.layout == layout) || row.x.values.size() != d) {
      throw DataError("training rows have inconsistent feature layouts");
    }
    x.insert(x.end(), row.x.values.begin(), row.x.values.end());
    y.push_back(row.runtime_s);
  }
  return TrainGbm(x, y, layout, hp);
}

}  // namespace metainf
