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

#include "metainf/error.h"
#include "metainf/metrics.h"
#include "metainf/protocol.h"
#include "metainf/synth.h"
#include "support.h"

using namespace metainf;

namespace {

const std::vector<MethodConfig> kTwo = {methods::kNone, methods::kAll};

// Outcome whose true best is `truth` and whose selection is `pick`.
TrialOutcome Two(const MethodConfig& truth, const MethodConfig& pick) {
  std::vector<double> rt = truth == methods::kNone ? std::vector<double>{1.0, 2.0}
                                                   : std::vector<double>{2.0, 1.0};
  std::vector<MethodConfig> ranking = {pick, pick == methods::kNone ? methods::kAll : methods::kNone};
  return MakeOutcome("t", "h", pick, ranking, kTwo, rt);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("accuracy on a hand-built 10 trial set") {
    std::vector<TrialOutcome> o;
    for (int i = 0; i < 7; ++i) o.push_back(Two(methods::kNone, methods::kNone));
    for (int i = 0; i < 3; ++i) o.push_back(Two(methods::kAll, methods::kNone));
    CHECK(SelectionAccuracy(o) == doctest::Approx(0.7));
    CHECK(MeanRank(o) == doctest::Approx(1.3));
  }

  TEST_CASE("macro F1 on a symmetric confusion matrix") {
    // [[2,1],[1,2]]
    std::vector<TrialOutcome> o = {Two(methods::kNone, methods::kNone), Two(methods::kNone, methods::kNone),
                                   Two(methods::kNone, methods::kAll), Two(methods::kAll, methods::kNone),
                                   Two(methods::kAll, methods::kAll), Two(methods::kAll, methods::kAll)};
    CHECK(MacroF1(o) == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("macro F1 when one class is always predicted") {
    // Truth {A, A, B}, always A: F1(A) = 4/5, F1(B) = 0.
    std::vector<TrialOutcome> o = {Two(methods::kNone, methods::kNone), Two(methods::kNone, methods::kNone),
                                   Two(methods::kAll, methods::kNone)};
    CHECK(MacroF1(o) == doctest::Approx(0.5 * 0.8));
  }

  TEST_CASE("acceleration ratio on the batch 256 reference row") {
    std::vector<TrialOutcome> o = {MakeOutcome("bs256", "l4x4", methods::kPrefixCaching,
                                               testing::ReferenceMethods(), testing::ReferenceMethods(),
                                               testing::ReferenceBs256())};
    CHECK(std::abs(AccelerationRatio(o) - 5.25) < 0.005);
  }

  TEST_CASE("empty outcome sets and foreign selections are rejected") {
    std::vector<TrialOutcome> none;
    CHECK_THROWS_AS(SelectionAccuracy(none), DataError);
    CHECK_THROWS_AS(MakeOutcome("t", "h", methods::kPrefixCaching, {}, kTwo, {1.0, 2.0}),
                    IntegrityError);
  }
}

TEST_SUITE("synth") {
  TEST_CASE("noiseless generator reproduces the reference argmins on 4 x L4") {
    const SynthSpec spec = DefaultSynthSpec();
    HardwareProfile l4;
    for (const auto& h : spec.hardware)
      if (h.id == "l4x4") l4 = h;
    auto argmin = [&](int batch) {
      TaskProfile t = testing::ReferenceTask("calib", batch);
      MethodConfig best = spec.methods.front();
      for (const auto& m : spec.methods)
        if (SynthRuntime(spec, t, m, l4) < SynthRuntime(spec, t, best, l4)) best = m;
      return best;
    };
    CHECK(argmin(16) == methods::kAll);
    CHECK(argmin(256) == methods::kPrefixCaching);
  }

  TEST_CASE("generation is deterministic in the seed") {
    SynthSpec s = DefaultSynthSpec();
    s.train_tasks = 10;
    s.eval_tasks = 5;
    SynthData a = GenerateSynthetic(s), b = GenerateSynthetic(s);
    CHECK(a.store == b.store);
    CHECK(a.eval_tasks == b.eval_tasks);
    s.seed = 8;
    CHECK_FALSE(GenerateSynthetic(s).store == a.store);
  }

  TEST_CASE("spec JSON round-trips") {
    const SynthSpec s = DefaultSynthSpec();
    CHECK(SynthSpec::FromJson(s.ToJson()).ToJson() == s.ToJson());
    nlohmann::json bad = s.ToJson();
    bad["train_tasks"] = 0;
    CHECK_THROWS_AS(SynthSpec::FromJson(bad), UsageError);
  }
}

TEST_SUITE("protocol") {
  TEST_CASE("reports are reproducible and the oracle is perfect") {
    const SynthData& d = testing::SmallSynth();
    ExperimentConfig cfg;
    cfg.embedding.rank = 8;
    cfg.kinds = {SelectorKind::kGlobalBest, SelectorKind::kRidge};
    auto provider = testing::Fallback();
    ProtocolReport a = RunExperiment(cfg, d, provider, 100, 3);
    ProtocolReport b = RunExperiment(cfg, d, provider, 100, 3);
    CHECK(a.ToJson().dump() == b.ToJson().dump());
    CHECK(a.TrialCsv() == b.TrialCsv());
    CHECK(*a.at("oracle").accuracy == 1.0);
    CHECK(*a.at("oracle").mean_rank == 1.0);
    CHECK(a.SummaryCsv().starts_with("selector,accuracy,macro_f1"));
  }
}
