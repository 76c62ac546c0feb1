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

#include "metainf/protocol.h"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "metainf/error.h"
#include "metainf/selection.h"
#include "rng.h"

namespace metainf {

using nlohmann::json;

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string OptNum(const std::optional<double>& v) { return v ? Num(*v) : ""; }

json OptJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<MethodConfig> SortedMethods(std::vector<MethodConfig> ms) {
  std::sort(ms.begin(), ms.end(), [](const MethodConfig& a, const MethodConfig& b) {
    return MethodIndex(a) < MethodIndex(b);
  });
  return ms;
}

}  // namespace

EvalPool MakeEvalPool(const SynthData& data, bool seen) {
  EvalPool pool;
  if (seen) {
    for (const auto& [id, t] : data.catalog.tasks) pool.tasks.push_back(t);
  } else {
    pool.tasks = data.eval_tasks;
  }
  pool.hardware = data.spec.hardware;
  std::sort(pool.hardware.begin(), pool.hardware.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  pool.methods = SortedMethods(data.spec.methods);
  pool.truth = SynthTruth(data.spec);
  return pool;
}

std::vector<Trial> SampleTrials(const EvalPool& pool, int count, uint64_t seed) {
  if (count < 1) throw UsageError("trial count must be >= 1");
  if (pool.tasks.empty() || pool.hardware.empty()) {
    throw DataError("evaluation pool has no tasks or no hardware");
  }
  std::mt19937_64 gen(seed);
  std::vector<Trial> out;
  for (int i = 0; i < count; ++i) {
    Trial t;
    t.task = rng::Index(gen, pool.tasks.size());
    t.hardware = rng::Index(gen, pool.hardware.size());
    out.push_back(t);
  }
  return out;
}

double SelectorReport::accuracy_all_trials() const {
  const std::size_t total = outcomes.size() + failures.size();
  if (total == 0) return 0.0;
  std::size_t hit = 0;
  for (const auto& o : outcomes) hit += o.selected == o.true_best;
  return static_cast<double>(hit) / static_cast<double>(total);
}

json SelectorReport::ToJson() const {
  json f = json::array();
  for (const auto& [i, msg] : failures) f.push_back({{"trial", i}, {"error", msg}});
  return {{"accuracy", OptJson(accuracy)},
          {"macro_f1", OptJson(macro_f1)},
          {"acceleration_ratio", OptJson(acceleration_ratio)},
          {"mean_rank", OptJson(mean_rank)},
          {"n_trials", outcomes.size()},
          {"failures", failures.size()},
          {"accuracy_all_trials", accuracy_all_trials()},
          {"failure_details", f}};
}

SelectorReport EvaluateSelector(const NamedSelector& named, const EvalPool& pool,
                                const std::vector<Trial>& trials,
                                const Budget& budget) {
  SelectorReport r;
  r.name = named.name;
  for (std::size_t n = 0; n < trials.size(); ++n) {
    const TaskProfile& task = pool.tasks.at(trials[n].task);
    const HardwareProfile& hw = pool.hardware.at(trials[n].hardware);
    try {
      SelectionResult sel = Select({task, hw, budget, named.selector});
      std::vector<MethodConfig> ranking;
      for (const auto& rm : sel.ranking) ranking.push_back(rm.method);
      std::vector<double> truth;
      for (const auto& m : pool.methods) truth.push_back(pool.truth(task, m, hw));
      r.outcomes.push_back(MakeOutcome(task.id, hw.id, sel.method,
                                       std::move(ranking), pool.methods,
                                       std::move(truth)));
    } catch (const Error& e) {
      r.failures.emplace_back(static_cast<int>(n), e.what());
    }
  }
  if (!r.outcomes.empty()) {
    r.accuracy = SelectionAccuracy(r.outcomes);
    r.macro_f1 = MacroF1(r.outcomes);
    r.acceleration_ratio = AccelerationRatio(r.outcomes);
    r.mean_rank = MeanRank(r.outcomes);
  }
  return r;
}

const SelectorReport& ProtocolReport::at(const std::string& name) const {
  for (const auto& s : selectors) {
    if (s.name == name) return s;
  }
  throw UsageError("no selector named '" + name + "' in the report");
}

json ProtocolReport::ToJson() const {
  json sel = json::object();
  json order = json::array();
  for (const auto& s : selectors) {
    sel[s.name] = s.ToJson();
    order.push_back(s.name);
  }
  return {{"v", 1},
          {"seed", seed},
          {"trials", trials},
          {"budget", budget.unlimited() ? json(nullptr) : json(budget.limit)},
          {"order", order},
          {"selectors", sel}};
}

std::string ProtocolReport::SummaryCsv() const {
  std::ostringstream out;
  out << "selector,accuracy,macro_f1,acceleration_ratio,mean_rank,n_trials,failures\n";
  for (const auto& s : selectors) {
    out << s.name << ',' << OptNum(s.accuracy) << ',' << OptNum(s.macro_f1) << ','
        << OptNum(s.acceleration_ratio) << ',' << OptNum(s.mean_rank) << ','
        << s.outcomes.size() << ',' << s.failures.size() << '\n';
  }
  return out.str();
}

std::string ProtocolReport::TrialCsv() const {
  std::ostringstream out;
  out << "selector,trial,task,hardware,selected,true_best,true_best_rank,"
         "selected_runtime_s,best_runtime_s,mean_runtime_s\n";
  for (const auto& s : selectors) {
    int n = 0;
    for (const auto& o : s.outcomes) {
      double best = *std::min_element(o.true_runtimes_s.begin(),
                                      o.true_runtimes_s.end());
      out << s.name << ',' << n++ << ',' << o.task << ',' << o.hardware << ','
          << MethodName(o.selected) << ',' << MethodName(o.true_best) << ','
          << RankOfTrueBest(o) << ',' << Num(o.selected_runtime_s) << ','
          << Num(best) << ',' << Num(o.mean_runtime_s) << '\n';
    }
  }
  return out.str();
}

ProtocolReport RunProtocol(const std::vector<NamedSelector>& selectors,
                           const EvalPool& pool, int trials, uint64_t seed,
                           const Budget& budget) {
  ProtocolReport report;
  report.seed = seed;
  report.trials = trials;
  report.budget = budget;
  const auto sample = SampleTrials(pool, trials, seed);
  for (const auto& s : selectors) {
    report.selectors.push_back(EvaluateSelector(s, pool, sample, budget));
  }
  return report;
}

FittedSet FitExperiment(const ExperimentConfig& config, const SynthData& data,
                        std::shared_ptr<EmbeddingProvider> provider) {
  FittedSet out;
  const PerformanceTensor tensor = data.store.AssembleTensor();
  out.featurizer = Featurizer::Fit(config.embedding, data.catalog, tensor, provider);
  TrainingContext ctx{tensor, data.catalog, out.featurizer};
  for (SelectorKind kind : config.kinds) {
    SelectorSpec spec = config.base;
    spec.kind = kind;
    out.selectors.push_back({ToString(kind), FitSelector(spec, ctx)});
  }
  if (config.include_oracle) {
    out.selectors.push_back({"oracle", MakeSynthOracle(data.spec)});
  }
  if (config.include_random) {
    out.selectors.push_back(
        {"random", MakeRandomSelector(tensor.methods(), config.base.seed)});
  }
  return out;
}

ProtocolReport RunExperiment(const ExperimentConfig& config,
                             const SynthData& data,
                             std::shared_ptr<EmbeddingProvider> provider,
                             int trials, uint64_t seed) {
  FittedSet fitted = FitExperiment(config, data, std::move(provider));
  return RunProtocol(fitted.selectors, MakeEvalPool(data, false), trials, seed);
}

const AblationCell& AblationReport::at(PromptStyle style, int rank) const {
  for (const auto& c : cells) {
    if (c.style == style && c.rank == rank) return c;
  }
  throw UsageError("no ablation cell for that style and rank");
}

json AblationReport::ToJson() const {
  json out = json::array();
  for (const auto& c : cells) {
    json unseen = c.unseen_attempt ? c.unseen_attempt->ToJson() : json(nullptr);
    // Per-trial failure lists of the unseen attempt are all unknown-id errors.
    if (c.unseen_attempt) {
      for (auto& [name, s] : unseen["selectors"].items()) {
        s["failure_details"] = json::array();
      }
    }
    out.push_back({{"style", ToString(c.style)},
                   {"rank", c.rank},
                   {"evaluation", c.seen_only ? "seen_tasks_only" : "unseen_tasks"},
                   {"note", c.seen_only
                                ? "one-hot encodings cannot represent unseen "
                                  "tasks; this arm is evaluated on training tasks"
                                : ""},
                   {"effective_ranks", c.effective_ranks},
                   {"warnings", c.warnings},
                   {"report", c.report.ToJson()},
                   {"unseen_attempt", unseen}});
  }
  return {{"v", 1}, {"cells", out}};
}

std::string AblationReport::Csv() const {
  std::ostringstream out;
  out << "style,rank,evaluation,selector,accuracy,macro_f1,acceleration_ratio,mean_rank\n";
  for (const auto& c : cells) {
    for (const auto& s : c.report.selectors) {
      out << ToString(c.style) << ',' << c.rank << ','
          << (c.seen_only ? "seen" : "unseen") << ',' << s.name << ','
          << OptNum(s.accuracy) << ',' << OptNum(s.macro_f1) << ','
          << OptNum(s.acceleration_ratio) << ',' << OptNum(s.mean_rank) << '\n';
    }
  }
  return out.str();
}

AblationReport RunAblation(const ExperimentConfig& config, const SynthData& data,
                           std::shared_ptr<EmbeddingProvider> provider,
                           const std::vector<PromptStyle>& styles,
                           const std::vector<int>& ranks, int trials,
                           uint64_t seed) {
  AblationReport report;
  const EvalPool unseen = MakeEvalPool(data, false);
  const EvalPool seen = MakeEvalPool(data, true);
  for (PromptStyle style : styles) {
    for (int rank : ranks) {
      ExperimentConfig cfg = config;
      cfg.embedding.style = style;
      cfg.embedding.rank = rank;
      cfg.include_oracle = false;
      cfg.include_random = false;
      FittedSet fitted = FitExperiment(cfg, data, provider);
      AblationCell cell;
      cell.style = style;
      cell.rank = rank;
      cell.seen_only = style == PromptStyle::kOneHot;
      cell.effective_ranks = fitted.featurizer->effective_ranks();
      cell.warnings = fitted.featurizer->warnings();
      cell.report = RunProtocol(fitted.selectors, cell.seen_only ? seen : unseen,
                                trials, seed);
      if (cell.seen_only) {
        cell.unseen_attempt = RunProtocol(fitted.selectors, unseen, trials, seed);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace metainf
