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

#include <doctest.h>

#include <cmath>

#include "metainf/error.h"
#include "metainf/gbm.h"
#include "metainf/ridge.h"
#include "support.h"

using namespace metainf;

namespace {

FeatureLayout Flat(int dims) {
  // Plain numeric features live in the data segment; side slots stay zero.
  FeatureLayout l;
  l.data_dim = dims;
  return l;
}

std::vector<double> Widen(const std::vector<std::vector<double>>& x, int dims) {
  std::vector<double> out;
  for (const auto& row : x) {
    out.insert(out.end(), row.begin(), row.end());
    out.insert(out.end(), Flat(dims).size() - dims, 0.0);
  }
  return out;
}

double TrainRmse(const GbmModel& m, const std::vector<double>& x,
                 const std::vector<double>& y, int width) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = m.Predict(std::span<const double>(x.data() + i * width, width));
    s += (p - y[i]) * (p - y[i]);
  }
  return std::sqrt(s / y.size());
}

}  // namespace

TEST_SUITE("predictor") {
  TEST_CASE("y = x is fit within 5% of the target range") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 100; ++i) {
      x.push_back({static_cast<double>(i)});
      y.push_back(static_cast<double>(i) + 1.0);
    }
    GbmHyperparams hp;
    hp.target_transform = TargetTransform::kIdentity;
    const auto flat = Widen(x, 1);
    GbmModel m = TrainGbm(flat, y, Flat(1), hp);
    CHECK(TrainRmse(m, flat, y, Flat(1).size()) <= 0.05 * 99.0);
  }

  TEST_CASE("fully grown trees with lr 1 memorize noiseless data") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 64; ++i) {
      x.push_back({u(gen), u(gen), u(gen)});
      y.push_back(1.0 + 3 * x.back()[0] + std::sin(6 * x.back()[1]) + x.back()[2] * x.back()[0]);
    }
    GbmHyperparams hp;
    hp.learning_rate = 1.0;
    hp.max_depth = 16;
    hp.min_samples_leaf = 1;
    hp.n_rounds = 1;
    hp.target_transform = TargetTransform::kIdentity;
    const auto flat = Widen(x, 3);
    GbmModel m = TrainGbm(flat, y, Flat(3), hp);
    CHECK(TrainRmse(m, flat, y, Flat(3).size()) <= 1e-6);
  }

  TEST_CASE("training loss never increases across rounds") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 80; ++i) {
      x.push_back({n(gen), n(gen)});
      y.push_back(std::exp(0.3 * x.back()[0]) + 0.1 * n(gen) + 5.0);
    }
    GbmHyperparams hp;
    hp.n_rounds = 50;
    GbmModel m = TrainGbm(Widen(x, 2), y, Flat(2), hp);
    REQUIRE(m.round_losses.size() == 51);
    for (std::size_t r = 1; r < m.round_losses.size(); ++r)
      CHECK(m.round_losses[r] <= m.round_losses[r - 1]);
  }

  TEST_CASE("model JSON round-trips predictions exactly") {
    std::vector<std::vector<double>> x = {{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}};
    std::vector<double> y = {1, 3, 2, 5, 4, 6, 8, 7, 9, 10};
    GbmHyperparams hp;
    hp.min_samples_leaf = 1;
    const auto flat = Widen(x, 1);
    GbmModel m = TrainGbm(flat, y, Flat(1), hp);
    GbmModel back = GbmModel::FromJson(m.ToJson());
    const int w = Flat(1).size();
    for (std::size_t i = 0; i < y.size(); ++i) {
      std::span<const double> row(flat.data() + i * w, w);
      CHECK(back.Predict(row) == m.Predict(row));
    }
  }

  TEST_CASE("invalid hyperparameters are usage errors") {
    GbmHyperparams hp;
    hp.learning_rate = 0.0;
    CHECK_THROWS_AS(hp.Validate(), UsageError);
    hp = {};
    hp.subsample = 1.5;
    CHECK_THROWS_AS(hp.Validate(), UsageError);
  }

  TEST_CASE("ridge matches the normal-equations oracle on a random 20x5 system") {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> x(20, std::vector<double>(5));
    std::vector<double> y(20);
    for (int i = 0; i < 20; ++i) {
      for (double& v : x[i]) v = n(gen);
      y[i] = n(gen);
    }
    RidgeModel m = TrainRidge(Widen(x, 5), y, Flat(5), 0.1);
    auto oracle = testing::SolveRidgeNormal(x, y, 0.1);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(m.weights[j] - oracle.w[j]) <= 1e-8);
    CHECK(std::abs(m.intercept - oracle.intercept) <= 1e-8);
  }
}
