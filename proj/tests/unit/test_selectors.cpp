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

#include <algorithm>

#include "metainf/error.h"
#include "metainf/featurizer.h"
#include "metainf/protocol.h"
#include "metainf/selection.h"
#include "metainf/selectors.h"
#include "support.h"

using namespace metainf;

namespace {

struct Fitted {
  PerformanceTensor tensor;
  std::shared_ptr<const Featurizer> featurizer;
};

const Fitted& SmallFitted() {
  static const Fitted f = [] {
    const SynthData& d = testing::SmallSynth();
    Fitted out{d.store.AssembleTensor(), nullptr};
    out.featurizer = Featurizer::Fit({PromptStyle::kRich, 16, {}}, d.catalog, out.tensor,
                                     testing::Fallback());
    return out;
  }();
  return f;
}

std::shared_ptr<const Selector> FitSmall(SelectorSpec spec) {
  const Fitted& f = SmallFitted();
  return FitSelector(spec, {f.tensor, testing::SmallSynth().catalog, f.featurizer});
}

std::vector<MethodConfig> Order(const std::vector<RankedMethod>& r) {
  std::vector<MethodConfig> out;
  for (const auto& x : r) out.push_back(x.method);
  return out;
}

}  // namespace

TEST_SUITE("selectors") {
  TEST_CASE("global best on the reference table averages the two batch columns") {
    RecordStore store = testing::ReferenceStore();
    const PerformanceTensor t = store.AssembleTensor();
    const Catalog cat = testing::ReferenceCatalog();
    SelectorSpec spec;
    spec.kind = SelectorKind::kGlobalBest;
    auto sel = FitSelector(spec, {t, cat, nullptr});
    auto ranking = sel->RankMethods(testing::ReferenceTask("new", 64), testing::L4x4());
    std::map<std::string, double> expect = {{"None", 1430.13},
                                            {"Chunked Prefill", 121.57},
                                            {"Continuous Batching", 126.92},
                                            {"Prefix Caching", 84.78},
                                            {"All", 88.43}};
    REQUIRE(ranking.size() == 5);
    for (const auto& r : ranking)
      CHECK(std::abs(r.predicted_runtime_s - expect.at(MethodName(r.method))) <= 0.005);
    CHECK(ranking.front().method == methods::kPrefixCaching);
  }

  TEST_CASE("sort ranking breaks ties by method index") {
    auto r = SortRanking({{methods::kAll, 1.0}, {methods::kNone, 1.0}, {methods::kChunkedPrefill, 0.5}});
    CHECK(Order(r) == std::vector<MethodConfig>{methods::kChunkedPrefill, methods::kNone, methods::kAll});
  }

  TEST_CASE("ALS recovers a noiseless rank-1 matrix") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    Eigen::VectorXd a(7), b(5);
    for (int i = 0; i < 7; ++i) a(i) = u(gen);
    for (int j = 0; j < 5; ++j) b(j) = u(gen);
    Eigen::MatrixXd m = a * b.transpose();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(7, 5);
    mask.setConstant(true);
    mask(1, 2) = mask(4, 0) = mask(6, 3) = false;
    AlsResult r = FactorizeAls(m, mask, 1, 1e-8, 2000, 1e-6, 1);
    Eigen::MatrixXd rec = r.row_factors * r.col_factors.transpose();
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 5; ++j)
        if (mask(i, j)) CHECK(std::abs(rec(i, j) - m(i, j)) <= 1e-3);
  }

  TEST_CASE("ALS reports non-convergence") {
    std::mt19937_64 gen(1);
    Eigen::MatrixXd m = testing::RandomMatrix(6, 6, gen);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(6, 6);
    mask.setConstant(true);
    CHECK_THROWS_AS(FactorizeAls(m, mask, 2, 1e-2, 2, 1e-15, 1), DataError);
  }

  TEST_CASE("k-means finds well separated clusters") {
    Eigen::MatrixXd p(6, 2);
    p << 0, 0, 0.1, 0, 0, 0.1, 10, 10, 10.1, 10, 10, 10.1;
    KMeansResult r = KMeans(p, 2, 5, 50, 3);
    CHECK(r.assignment[0] == r.assignment[1]);
    CHECK(r.assignment[0] == r.assignment[2]);
    CHECK(r.assignment[3] == r.assignment[4]);
    CHECK(r.assignment[0] != r.assignment[3]);
    CHECK(NearestCentroid(r.centroids, Eigen::Vector2d(9, 9)) == r.assignment[3]);
  }

  TEST_CASE("ISAC with one cluster ranks like global best") {
    SelectorSpec isac;
    isac.kind = SelectorKind::kIsac;
    isac.isac_clusters = 1;
    SelectorSpec gb;
    gb.kind = SelectorKind::kGlobalBest;
    auto a = FitSmall(isac), b = FitSmall(gb);
    const SynthData& d = testing::SmallSynth();
    for (const auto& t : d.eval_tasks)
      for (const auto& hw : d.spec.hardware) CHECK(Order(a->RankMethods(t, hw)) == Order(b->RankMethods(t, hw)));
  }

  TEST_CASE("ArgoSmart on a training task returns its measured ordering") {
    SelectorSpec spec;
    spec.kind = SelectorKind::kArgoSmart;
    auto sel = FitSmall(spec);
    const Fitted& f = SmallFitted();
    const SynthData& d = testing::SmallSynth();
    int checked = 0;
    for (std::size_t ti = 0; ti < f.tensor.num_tasks(); ++ti)
      for (std::size_t hi = 0; hi < f.tensor.num_hardware(); ++hi) {
        std::vector<RankedMethod> measured;
        for (std::size_t mi = 0; mi < f.tensor.num_methods(); ++mi) {
          if (!f.tensor.at(ti, mi, hi)) break;
          measured.push_back({f.tensor.methods()[mi], *f.tensor.at(ti, mi, hi)});
        }
        if (measured.size() != f.tensor.num_methods()) continue;
        const auto got = sel->RankMethods(d.catalog.task(f.tensor.tasks()[ti]),
                                          d.catalog.hardware_profile(f.tensor.hardware()[hi]));
        CHECK(Order(got) == Order(SortRanking(measured)));
        ++checked;
      }
    CHECK(checked > 0);
  }

  TEST_CASE("every trainable selector round-trips through JSON") {
    const SynthData& d = testing::SmallSynth();
    for (SelectorKind kind : kTrainableSelectors) {
      SelectorSpec spec;
      spec.kind = kind;
      spec.gbm.n_rounds = 30;
      auto sel = FitSmall(spec);
      auto back = LoadSelector(sel->ToJson(), testing::Fallback());
      CHECK(back->kind() == kind);
      for (int i = 0; i < 5; ++i) {
        const auto& t = d.eval_tasks[i];
        const auto& hw = d.spec.hardware[i % d.spec.hardware.size()];
        CHECK(back->RankMethods(t, hw) == sel->RankMethods(t, hw));
      }
    }
  }

  TEST_CASE("oracle snapshots need a factory; random ones are not serializable") {
    auto oracle = MakeSynthOracle(testing::SmallSynth().spec);
    CHECK_THROWS_AS(LoadSelector(oracle->ToJson(), testing::Fallback()), Error);
    auto back = LoadSelector(oracle->ToJson(), testing::Fallback(), SynthOracleFactory());
    CHECK(back->kind() == SelectorKind::kOracle);
    auto random = MakeRandomSelector(AllMethods(), 1);
    CHECK_THROWS_AS(random->ToJson(), UsageError);
  }

  TEST_CASE("uniform random selector hits one of five methods about 20% of the time") {
    // One draw per distinct (task, hardware) context.
    auto random = MakeRandomSelector(std::vector<MethodConfig>(kNamedMethods.begin(), kNamedMethods.end()), 42);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
      auto r = random->RankMethods(testing::ReferenceTask("rand-" + std::to_string(i), 16), testing::L4x4());
      hits += r.front().method == methods::kAll;
    }
    CHECK(std::abs(hits / 10000.0 - 0.2) <= 0.02);
  }
}

TEST_SUITE("selection") {
  TEST_CASE("cost is price times runtime in hours") {
    CHECK(std::abs(EstimateCost(testing::L4x4(1.2), 96.21).amount - 0.032070) <= 5e-7);
    CHECK_THROWS_AS(EstimateCost(testing::L4x4(1.2), 0.0), DataError);
  }

  TEST_CASE("ground-truth scores reproduce the reference table argmins") {
    RecordStore store = testing::ReferenceStore();
    auto oracle = MakeTensorOracle(store.AssembleTensor());
    auto s16 = Select({testing::ReferenceTask("bs16", 16), testing::L4x4(), Budget::Unlimited(), oracle});
    CHECK(s16.method == methods::kAll);
    CHECK(s16.predicted_runtime_s == 96.21);
    auto s256 = Select({testing::ReferenceTask("bs256", 256), testing::L4x4(), Budget::Unlimited(), oracle});
    CHECK(s256.method == methods::kPrefixCaching);
    CHECK(s256.predicted_runtime_s == 68.46);
    CHECK(s256.feasible_set_size == 5);
  }

  TEST_CASE("budgets filter by estimated cost and match brute force") {
    RecordStore store = testing::ReferenceStore();
    auto oracle = MakeTensorOracle(store.AssembleTensor());
    const HardwareProfile hw = testing::L4x4(2.0);
    const auto runtimes = testing::ReferenceBs16();
    for (double b : {0.0, 0.05, 0.0534, 0.0535, 0.06, 0.1, 0.5, 1.0}) {
      // Brute force: fastest method whose cost fits.
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < runtimes.size(); ++i) {
        if (2.0 * runtimes[i] / 3600.0 > b) continue;
        if (!best || runtimes[i] < runtimes[*best]) best = i;
      }
      SelectionRequest req{testing::ReferenceTask("bs16", 16), hw, Budget{b}, oracle};
      if (!best) {
        CHECK_THROWS_AS(Select(req), InfeasibleError);
      } else {
        auto r = Select(req);
        CHECK(r.method == testing::ReferenceMethods()[*best]);
        CHECK(r.cost.amount <= b);
      }
    }
  }

  TEST_CASE("infeasible error carries the cheapest cost") {
    RecordStore store = testing::ReferenceStore();
    auto oracle = MakeTensorOracle(store.AssembleTensor());
    try {
      Select({testing::ReferenceTask("bs256", 256), testing::L4x4(3.6), Budget{0.0}, oracle});
      FAIL("expected infeasible");
    } catch (const InfeasibleError& e) {
      CHECK(e.cheapest_cost() == doctest::Approx(3.6 * 68.46 / 3600.0));
      CHECK(e.budget() == 0.0);
    }
    CHECK_THROWS_AS(Select({testing::ReferenceTask("bs16", 16), testing::L4x4(), Budget{-1.0}, oracle}),
                    UsageError);
  }
}
