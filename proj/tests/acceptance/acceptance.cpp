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

// Acceptance suite: one PASS/FAIL line per criterion. Usage:
//   metainf_acceptance <path-to-metainf-cli>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "metainf/error.h"
#include "metainf/gbm.h"
#include "metainf/protocol.h"
#include "metainf/ridge.h"
#include "metainf/selection.h"
#include "metainf/service.h"
#include "metainf/svd.h"
#include "metainf/synth.h"

// After Eigen: <resolv.h> defines a `_res` macro.
#include <httplib.h>

using namespace metainf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr int kTrials = 1000;
constexpr uint64_t kTrialSeed = 7;
constexpr double kMinMetaInfAccuracy = 0.85;
constexpr double kMarginOverGlobalBest = 0.15;
constexpr double kMarginOverArgoSmart = 0.10;
constexpr double kRuntimeBudgetS = 300.0;
constexpr double kMinAccelerationRatio = 1.2;
constexpr int kBudgetTrials = 10000;
constexpr int kOracleTensors = 50;
constexpr int kGbmDatasets = 20;
constexpr double kMemorizeRmse = 1e-6;
constexpr double kRidgeTolerance = 1e-8;
constexpr double kSvdTolerance = 1e-6;
constexpr int kSvdMaxDim = 50;
constexpr double kRankDrop = 0.02;
constexpr double kGpuGainLow = 0.03;
constexpr double kGpuGainHigh = 0.05;
constexpr int kServiceRequests = 1000;

int failures = 0;

void Report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::shared_ptr<EmbeddingProvider> Provider() {
  return std::make_shared<CachingProvider>(MakeProvider(EmbeddingProviderSpec{}));
}

// ---------------------------------------------------------------- 1, 2, 3

void DefaultRun(const SynthData& data, const FittedSet& fitted, double fit_s) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProtocolReport rep =
      RunProtocol(fitted.selectors, MakeEvalPool(data, false), kTrials, kTrialSeed);
  const double run_s =
      fit_s + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto& mi = rep.at("metainf");
  const double acc = *mi.accuracy;
  const double gb = *rep.at("global_best").accuracy;
  const double argo = *rep.at("argosmart").accuracy;
  Report(1,
         acc >= kMinMetaInfAccuracy && acc - gb >= kMarginOverGlobalBest &&
             acc - argo >= kMarginOverArgoSmart && run_s < kRuntimeBudgetS,
         Fmt("accuracy metainf %.3f (>= %.2f), global_best %.3f (margin %.3f >= %.2f), "
             "argosmart %.3f (margin %.3f >= %.2f), %.1f s (< %.0f s)",
             acc, kMinMetaInfAccuracy, gb, acc - gb, kMarginOverGlobalBest, argo, acc - argo,
             kMarginOverArgoSmart, run_s, kRuntimeBudgetS));

  bool lowest = true;
  std::string ranks;
  for (SelectorKind k : kTrainableSelectors) {
    const auto& s = rep.at(ToString(k));
    ranks += Fmt("%s %.3f ", ToString(k), *s.mean_rank);
    if (k != SelectorKind::kMetaInf && !(*mi.mean_rank < *s.mean_rank)) lowest = false;
  }
  const double oracle = *rep.at("oracle").accuracy;
  Report(2, lowest && oracle == 1.0,
         "mean rank " + ranks + Fmt("(metainf strictly lowest: %s), oracle accuracy %.3f",
                                    lowest ? "yes" : "no", oracle));

  bool best = *mi.acceleration_ratio >= kMinAccelerationRatio;
  std::string ratios;
  for (const auto& s : rep.selectors) {
    if (s.name == "oracle") continue;
    ratios += Fmt("%s %.3f ", s.name.c_str(), *s.acceleration_ratio);
    if (s.name != "metainf" && *s.acceleration_ratio > *mi.acceleration_ratio) best = false;
  }
  Report(3, best, "acceleration ratio " + ratios +
                      Fmt("(metainf >= %.1f and >= every baseline)", kMinAccelerationRatio));
}

// ---------------------------------------------------------------- 4, 5

struct RandomCase {
  PerformanceTensor tensor;
  std::vector<HardwareProfile> hardware;
  std::vector<TaskProfile> tasks;
};

RandomCase MakeCase(std::mt19937_64& gen, int max_tasks, int max_methods, int max_hw) {
  std::uniform_int_distribution<int> nt(1, max_tasks), nm(1, max_methods), nh(1, max_hw);
  std::lognormal_distribution<double> rt(4.0, 1.5);
  std::uniform_real_distribution<double> price(0.05, 40.0);
  std::vector<int> idx = {0, 1, 2, 3, 4, 5, 6, 7};
  std::shuffle(idx.begin(), idx.end(), gen);
  idx.resize(static_cast<std::size_t>(nm(gen)));
  std::sort(idx.begin(), idx.end());
  std::vector<MethodConfig> methods;
  for (int i : idx) methods.push_back(MethodFromIndex(i));

  RandomCase c;
  std::vector<std::string> task_ids, hw_ids;
  for (int i = nt(gen); i > 0; --i) {
    TaskProfile t;
    t.id = "t" + std::to_string(i);
    t.description = "random";
    t.batch_size = 16;
    c.tasks.push_back(t);
    task_ids.push_back(t.id);
  }
  for (int i = nh(gen); i > 0; --i) {
    HardwareProfile h{"h" + std::to_string(i), "L4", 4, 24.0, price(gen), ""};
    c.hardware.push_back(h);
    hw_ids.push_back(h.id);
  }
  std::sort(task_ids.begin(), task_ids.end());
  std::sort(hw_ids.begin(), hw_ids.end());
  c.tensor = PerformanceTensor(task_ids, methods, hw_ids);
  for (std::size_t a = 0; a < task_ids.size(); ++a)
    for (std::size_t b = 0; b < methods.size(); ++b)
      for (std::size_t d = 0; d < hw_ids.size(); ++d) c.tensor.set(a, b, d, rt(gen));
  return c;
}

double BruteCost(const HardwareProfile& hw, double runtime) {
  return hw.price_per_hour * (runtime / 3600.0);
}

// Budgets at, around and far from the candidate costs.
double DrawBudget(std::mt19937_64& gen, const std::vector<double>& costs) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<std::size_t> pick(0, costs.size() - 1);
  const double hi = *std::max_element(costs.begin(), costs.end());
  switch (kind(gen)) {
    case 0: return 0.0;
    case 1: return costs[pick(gen)];
    case 2: return std::nextafter(costs[pick(gen)], 0.0);
    case 3: return std::uniform_real_distribution<double>(0.0, hi * 1.2)(gen);
    default: return hi * 10.0;
  }
}

void BudgetSafety() {
  std::mt19937_64 gen(20240611);
  int violations = 0, mismatches = 0, infeasible = 0;
  for (int trial = 0; trial < kBudgetTrials; ++trial) {
    RandomCase c = MakeCase(gen, 3, 8, 3);
    // Half the trials score with the ground truth, half with a random ranker.
    std::shared_ptr<const Selector> sel =
        trial % 2 ? MakeRandomSelector(c.tensor.methods(), static_cast<uint64_t>(trial))
                  : MakeTensorOracle(c.tensor);
    const TaskProfile& task = c.tasks[static_cast<std::size_t>(trial) % c.tasks.size()];
    const HardwareProfile& hw = c.hardware[static_cast<std::size_t>(trial) % c.hardware.size()];
    const auto ranking = sel->RankMethods(task, hw);
    std::vector<double> costs;
    for (const auto& r : ranking) costs.push_back(BruteCost(hw, r.predicted_runtime_s));
    const double b = DrawBudget(gen, costs);
    const bool any = std::any_of(costs.begin(), costs.end(), [&](double x) { return x <= b; });
    try {
      SelectionResult r = Select({task, hw, Budget{b}, sel});
      if (!(r.cost.amount <= b)) ++violations;
      if (!any) ++mismatches;
    } catch (const InfeasibleError&) {
      ++infeasible;
      if (any) ++mismatches;
    }
  }
  Report(4, violations == 0 && mismatches == 0,
         Fmt("%d trials, %d budget violations, %d infeasibility mismatches vs enumeration "
             "(%d infeasible)",
             kBudgetTrials, violations, mismatches, infeasible));
}

void OracleEquivalence() {
  std::mt19937_64 gen(99);
  int cells = 0, matched = 0;
  for (int n = 0; n < kOracleTensors; ++n) {
    RandomCase c = MakeCase(gen, 6, 8, 4);
    auto oracle = MakeTensorOracle(c.tensor);
    for (const auto& task : c.tasks) {
      for (const auto& hw : c.hardware) {
        const auto ti = *c.tensor.task_index(task.id);
        const auto hi = *c.tensor.hardware_index(hw.id);
        std::vector<double> costs;
        for (std::size_t m = 0; m < c.tensor.num_methods(); ++m)
          costs.push_back(BruteCost(hw, *c.tensor.at(ti, m, hi)));
        const double b = DrawBudget(gen, costs);
        // Brute force: fastest feasible, then cheaper, then lower index.
        std::optional<std::size_t> best;
        for (std::size_t m = 0; m < costs.size(); ++m) {
          if (costs[m] > b) continue;
          const double rm = *c.tensor.at(ti, m, hi);
          if (!best) {
            best = m;
            continue;
          }
          const double rb = *c.tensor.at(ti, *best, hi);
          if (rm < rb || (rm == rb && costs[m] < costs[*best])) best = m;
        }
        ++cells;
        try {
          SelectionResult r = Select({task, hw, Budget{b}, oracle});
          if (best && r.method == c.tensor.methods()[*best]) ++matched;
        } catch (const InfeasibleError&) {
          if (!best) ++matched;
        }
      }
    }
  }
  Report(5, matched == cells,
         Fmt("%d tensors, %d/%d cells match brute-force constrained argmin", kOracleTensors,
             matched, cells));
}

// ---------------------------------------------------------------- 6

FeatureLayout Flat(int dims) {
  FeatureLayout l;
  l.data_dim = dims;
  return l;
}

std::vector<double> Pad(const std::vector<std::vector<double>>& x, int dims) {
  std::vector<double> out;
  for (const auto& row : x) {
    out.insert(out.end(), row.begin(), row.end());
    out.insert(out.end(), FeatureLayout::kSideCount, 0.0);
  }
  (void)dims;
  return out;
}

void GbmNumerics() {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n(0.0, 1.0);
  int monotone = 0;
  for (int d = 0; d < kGbmDatasets; ++d) {
    const int rows = 30 + d * 5, dims = 1 + d % 5;
    std::vector<std::vector<double>> x(rows, std::vector<double>(dims));
    std::vector<double> y(rows);
    for (int i = 0; i < rows; ++i) {
      for (double& v : x[i]) v = n(gen);
      y[i] = std::exp(0.5 * x[i][0] + 0.2 * n(gen)) + 1.0;
    }
    GbmHyperparams hp;
    hp.n_rounds = 60;
    hp.max_depth = 1 + d % 6;
    hp.learning_rate = 0.05 + 0.05 * (d % 4);
    hp.min_samples_leaf = 1 + d % 3;
    hp.target_transform = d % 2 ? TargetTransform::kLog : TargetTransform::kIdentity;
    GbmModel m = TrainGbm(Pad(x, dims), y, Flat(dims), hp);
    bool ok = m.round_losses.size() == static_cast<std::size_t>(hp.n_rounds + 1);
    for (std::size_t r = 1; ok && r < m.round_losses.size(); ++r)
      ok = m.round_losses[r] <= m.round_losses[r - 1];
    monotone += ok;
  }

  // Memorization: noiseless data, lr 1, unrestricted depth, one-sample leaves.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> x(128, std::vector<double>(4));
  std::vector<double> y(128);
  for (int i = 0; i < 128; ++i) {
    for (double& v : x[i]) v = u(gen);
    y[i] = std::sin(5 * x[i][0]) + x[i][1] * x[i][2] - x[i][3] + 2.0;
  }
  GbmHyperparams hp;
  hp.learning_rate = 1.0;
  hp.max_depth = 64;
  hp.min_samples_leaf = 1;
  hp.n_rounds = 1;
  hp.target_transform = TargetTransform::kIdentity;
  const auto flat = Pad(x, 4);
  GbmModel m = TrainGbm(flat, y, Flat(4), hp);
  const int width = Flat(4).size();
  double sse = 0.0;
  for (int i = 0; i < 128; ++i) {
    const double p = m.Predict(std::span<const double>(flat.data() + i * width, width));
    sse += (p - y[i]) * (p - y[i]);
  }
  const double rmse = std::sqrt(sse / 128);

  // Ridge against dense normal equations solved by Gaussian elimination.
  double ridge_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int rows = 20, dims = 5;
    std::vector<std::vector<double>> a(rows, std::vector<double>(dims));
    std::vector<double> t(rows);
    for (int i = 0; i < rows; ++i) {
      for (double& v : a[i]) v = n(gen);
      t[i] = n(gen);
    }
    const double lambda = 0.1;
    RidgeModel r = TrainRidge(Pad(a, dims), t, Flat(dims), lambda);
    // Oracle: [X 1]^T [X 1] with the intercept unpenalized.
    const int p = dims + 1;
    std::vector<std::vector<double>> g(p, std::vector<double>(p + 1, 0.0));
    for (int i = 0; i < rows; ++i) {
      std::vector<double> row = a[i];
      row.push_back(1.0);
      for (int j = 0; j < p; ++j) {
        for (int k = 0; k < p; ++k) g[j][k] += row[j] * row[k];
        g[j][p] += row[j] * t[i];
      }
    }
    for (int j = 0; j < dims; ++j) g[j][j] += lambda;
    for (int c = 0; c < p; ++c) {
      int piv = c;
      for (int r2 = c + 1; r2 < p; ++r2)
        if (std::abs(g[r2][c]) > std::abs(g[piv][c])) piv = r2;
      std::swap(g[c], g[piv]);
      for (int r2 = 0; r2 < p; ++r2) {
        if (r2 == c) continue;
        const double f = g[r2][c] / g[c][c];
        for (int k = c; k <= p; ++k) g[r2][k] -= f * g[c][k];
      }
    }
    for (int j = 0; j < dims; ++j)
      ridge_err = std::max(ridge_err, std::abs(r.weights[j] - g[j][p] / g[j][j]));
    ridge_err = std::max(ridge_err, std::abs(r.intercept - g[dims][p] / g[dims][dims]));
  }

  Report(6, monotone == kGbmDatasets && rmse <= kMemorizeRmse && ridge_err <= kRidgeTolerance,
         Fmt("training MSE non-increasing on %d/%d datasets, memorization RMSE %.2e (<= %.0e), "
             "ridge max deviation %.2e (<= %.0e)",
             monotone, kGbmDatasets, rmse, kMemorizeRmse, ridge_err, kRidgeTolerance));
}

// ---------------------------------------------------------------- 7

void SvdNumerics() {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> dim(2, kSvdMaxDim);
  std::normal_distribution<double> n(0.0, 1.0);
  double sv_err = 0.0, full_err = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int r = dim(gen), c = dim(gen);
    Eigen::MatrixXd a(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = n(gen);
    Eigen::MatrixXd centered = a.rowwise() - a.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered.transpose() * centered);
    Eigen::VectorXd oracle = es.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();

    const int kmax = std::min(r, c);
    SvdModel full = FitSvd(a, kmax);
    for (int i = 0; i < kmax; ++i)
      sv_err = std::max(sv_err, std::abs(full.singular_values(i) - oracle(i)));
    if (kmax == c) {
      full_err = std::max(
          full_err, (centered - centered * full.right_factors * full.right_factors.transpose()).norm());
    }
    double prev = 1e300;
    for (int k = 1; k <= kmax; k += std::max(1, kmax / 8)) {
      SvdModel m = FitSvd(a, k);
      const double e = (centered - centered * m.right_factors * m.right_factors.transpose()).norm();
      if (e > prev + 1e-9) monotone = false;
      prev = e;
    }
  }
  // Full rank on a tall matrix (k = raw_dim).
  Eigen::MatrixXd tall(kSvdMaxDim, 20);
  for (int i = 0; i < tall.rows(); ++i)
    for (int j = 0; j < tall.cols(); ++j) tall(i, j) = n(gen);
  SvdModel m = FitSvd(tall, 20);
  Eigen::MatrixXd tc = tall.rowwise() - tall.colwise().mean();
  full_err = std::max(full_err, (tc - tc * m.right_factors * m.right_factors.transpose()).norm());

  Report(7, sv_err <= kSvdTolerance && monotone && full_err <= kSvdTolerance,
         Fmt("max singular value deviation %.2e (<= %.0e), reconstruction non-increasing in k: "
             "%s, full-rank reconstruction error %.2e (<= %.0e)",
             sv_err, kSvdTolerance, monotone ? "yes" : "no", full_err, kSvdTolerance));
}

// ---------------------------------------------------------------- 8

void Ablation(const SynthData& data, std::shared_ptr<EmbeddingProvider> provider) {
  ExperimentConfig cfg;
  cfg.kinds = {SelectorKind::kMetaInf};
  const std::vector<PromptStyle> styles = {PromptStyle::kOneHot, PromptStyle::kBasic,
                                           PromptStyle::kRich, PromptStyle::kCot};
  AblationReport rep = RunAblation(cfg, data, provider, styles, {64, 256}, kTrials, kTrialSeed);

  auto acc = [&](PromptStyle s, int k) { return *rep.at(s, k).report.at("metainf").accuracy; };
  bool trend = true;
  std::string detail;
  for (PromptStyle s : styles) {
    const bool ok = acc(s, 256) >= acc(s, 64) - kRankDrop;
    trend = trend && ok;
    detail += Fmt("%s k64 %.3f k256 %.3f%s; ", ToString(s), acc(s, 64), acc(s, 256),
                  rep.at(s, 64).seen_only ? " (seen tasks only)" : "");
  }
  // One-hot cannot encode unseen tasks: its unseen-task arm is the attempt.
  const auto& one_hot = rep.at(PromptStyle::kOneHot, 64);
  const double one_hot_unseen = one_hot.unseen_attempt->at("metainf").accuracy_all_trials();
  bool styles_ok = true;
  for (PromptStyle s : {PromptStyle::kRich, PromptStyle::kCot})
    for (int k : {64, 256}) styles_ok = styles_ok && acc(s, k) >= one_hot_unseen;
  const bool stated = one_hot.seen_only && rep.ToJson()["cells"][0]["evaluation"] == "seen_tasks_only";
  detail += Fmt("one_hot on unseen tasks %.3f (%zu/%d trials fail to embed); rich/cot >= one_hot "
                "unseen: %s; seen-only arm labelled: %s",
                one_hot_unseen, one_hot.unseen_attempt->at("metainf").failures.size(), kTrials,
                styles_ok ? "yes" : "no", stated ? "yes" : "no");
  Report(8, trend && styles_ok && stated, detail);
}

// ---------------------------------------------------------------- 9

void Calibration() {
  const SynthSpec spec = DefaultSynthSpec();
  auto hw = [&](const std::string& id) {
    for (const auto& h : spec.hardware)
      if (h.id == id) return h;
    throw IntegrityError("missing hardware " + id);
  };
  auto task = [](const std::string& model, int batch) {
    TaskProfile t;
    t.id = "calibration";
    t.description = "calibration workload";
    t.batch_size = batch;
    t.prompt_count = 1000;
    t.model = model;
    return t;
  };
  auto argmin = [&](const TaskProfile& t, const HardwareProfile& h) {
    MethodConfig best = spec.methods.front();
    for (const auto& m : spec.methods)
      if (SynthRuntime(spec, t, m, h) < SynthRuntime(spec, t, best, h)) best = m;
    return best;
  };
  const HardwareProfile l4 = hw("l4x4"), l8 = hw("l4x8");
  const bool t16 = argmin(task("llama-3.1-8b", 16), l4) == methods::kAll;
  const bool t256 = argmin(task("llama-3.1-8b", 256), l4) == methods::kPrefixCaching;

  // Signs of improvement over continuous batching at batch 1024 on L4.
  struct Expect {
    const char* model;
    int cp, pc, all;
  };
  const Expect signs[] = {{"baichuan2-7b", +1, +1, +1},
                          {"qwen2.5-7b", +1, -1, -1},
                          {"phi-2", -1, -1, -1}};
  bool sign_ok = true;
  for (const auto& e : signs) {
    const TaskProfile t = task(e.model, 1024);
    const double cb = SynthRuntime(spec, t, methods::kContinuousBatching, l4);
    auto sgn = [&](const MethodConfig& m) {
      return cb - SynthRuntime(spec, t, m, l4) > 0 ? +1 : -1;
    };
    sign_ok = sign_ok && sgn(methods::kChunkedPrefill) == e.cp &&
              sgn(methods::kPrefixCaching) == e.pc && sgn(methods::kAll) == e.all;
  }
  const TaskProfile phi = task("phi-2", 1024);
  const bool phi_regress = SynthRuntime(spec, phi, methods::kPrefixCaching, l4) >
                           SynthRuntime(spec, phi, methods::kContinuousBatching, l4);

  double lo = 1.0, hi = 0.0;
  for (const auto& m : spec.methods)
    for (int b : spec.batch_grid) {
      const TaskProfile t = task("llama-3.1-8b", b);
      const double gain = 1.0 - SynthRuntime(spec, t, m, l8) / SynthRuntime(spec, t, m, l4);
      lo = std::min(lo, gain);
      hi = std::max(hi, gain);
    }
  const bool gpu_ok = lo >= kGpuGainLow && hi <= kGpuGainHigh;

  Report(9, t16 && t256 && sign_ok && phi_regress && gpu_ok,
         Fmt("argmin at batch 16 is All: %s, at batch 256 is Prefix Caching: %s; "
             "improvement sign pattern vs CB (baichuan/qwen/phi): %s, phi PC slower than "
             "CB: %s; 4->8 GPU gain %.2f%%..%.2f%% (within %.0f%%..%.0f%%)",
             t16 ? "yes" : "no", t256 ? "yes" : "no", sign_ok ? "yes" : "no",
             phi_regress ? "yes" : "no", lo * 100, hi * 100, kGpuGainLow * 100,
             kGpuGainHigh * 100));
}

// ---------------------------------------------------------------- 10

std::string RunCapture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), p)) > 0) out.append(buf, n);
  if (pclose(p) != 0) out = "<exit failure>" + out;
  return out;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void Determinism(const std::string& cli, const SynthData& data, const FittedSet& fitted,
                 std::shared_ptr<EmbeddingProvider> provider) {
  const fs::path dir = fs::temp_directory_path() / "metainf_acceptance";
  fs::remove_all(dir);
  const std::string base = "'" + cli + "' evaluate --trials 1000 --seed 7 --out-dir '";
  const std::string a = RunCapture(base + (dir / "a").string() + "' 2>/dev/null");
  const std::string b = RunCapture(base + (dir / "b").string() + "' 2>/dev/null");
  bool cli_same = !a.empty() && a.rfind("<exit failure>", 0) != 0 && a == b;
  for (const char* f : {"summary.csv", "trials.csv", "report.json"})
    cli_same = cli_same && Slurp(dir / "a" / f) == Slurp(dir / "b" / f) &&
               !Slurp(dir / "a" / f).empty();

  // Service over HTTP vs library selection on the same snapshot.
  AppConfig cfg;
  cfg.SetDataDir(dir / "service");
  cfg.port = 0;
  fs::create_directories(dir / "service");
  data.catalog.Save(cfg.catalog_path);
  Service service(cfg, provider);
  service.LoadState();
  std::shared_ptr<const Selector> metainf_sel;
  for (const auto& s : fitted.selectors)
    if (s.name == "metainf") metainf_sel = s.selector;
  service.Install(MakeSnapshot(metainf_sel));
  const auto snap = service.snapshot();
  const int port = service.Bind();
  std::thread server([&] { service.Run(); });
  httplib::Client client("127.0.0.1", port);

  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> pick_task(0, data.eval_tasks.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_hw(0, data.spec.hardware.size() - 1);
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  const std::vector<int> batches = {1, 8, 16, 64, 256, 1024};
  int equal = 0, infeasible = 0;
  for (int i = 0; i < kServiceRequests; ++i) {
    TaskProfile t = data.eval_tasks[pick_task(gen)];
    HardwareProfile h = data.spec.hardware[pick_hw(gen)];
    h.price_per_hour *= scale(gen);
    if (coin(gen) == 0) t.batch_size = batches[static_cast<std::size_t>(coin(gen))];
    if (coin(gen) == 0) t.model = "unlisted-model";
    json budget = nullptr;
    switch (coin(gen)) {
      case 0: budget = 0.0; break;
      case 1: budget = 0.5 * scale(gen); break;
      case 2: budget = 0.1 * scale(gen); break;
      default: break;
    }
    json req = {{"v", 1},
                {"task",
                 {{"id", t.id},
                  {"description", t.description},
                  {"batch_size", t.batch_size},
                  {"prompt_count", t.prompt_count},
                  {"source_tag", t.source_tag}}},
                {"model", t.model},
                {"hardware",
                 {{"gpu_class", h.gpu_class}, {"gpu_count", h.gpu_count},
                  {"price_per_hour", h.price_per_hour}}},
                {"budget", budget}};
    auto res = client.Post("/v1/select", req.dump(), "application/json");
    if (!res) continue;
    const json body = json::parse(res->body);

    json expect;
    int expect_status = 200;
    try {
      SelectionRequest sr{TaskFromRequest(req), HardwareFromRequest(req, service.catalog()),
                          BudgetFromRequest(req, std::nullopt), snap->selector};
      expect = SelectionToWire(Select(sr));
    } catch (const InfeasibleError& e) {
      expect_status = 422;
      expect = {{"cheapest_cost", e.cheapest_cost()}, {"budget", e.budget()}};
    }
    bool same = res->status == expect_status && body["model_version"] == snap->model_version;
    if (expect_status == 200) {
      json got = body;
      got.erase("model_version");
      same = same && got == expect;
    } else {
      ++infeasible;
      same = same && body["cheapest_cost"] == expect["cheapest_cost"] &&
             body["budget"] == expect["budget"];
    }
    equal += same;
  }
  service.Stop();
  server.join();
  fs::remove_all(dir);

  Report(10, cli_same && equal == kServiceRequests,
         Fmt("CLI evaluate --trials 1000 --seed 7 twice byte-identical (stdout and reports): %s; "
             "service /v1/select equals library selection on %d/%d randomized requests "
             "(%d infeasible)",
             cli_same ? "yes" : "no", equal, kServiceRequests, infeasible));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <metainf-cli>\n", argv[0]);
    return 2;
  }
  try {
    const SynthData data = GenerateSynthetic(DefaultSynthSpec());
    auto provider = Provider();
    const auto t0 = std::chrono::steady_clock::now();
    const FittedSet fitted = FitExperiment(ExperimentConfig{}, data, provider);
    const double fit_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    DefaultRun(data, fitted, fit_s);
    BudgetSafety();
    OracleEquivalence();
    GbmNumerics();
    SvdNumerics();
    Ablation(data, provider);
    Calibration();
    Determinism(argv[1], data, fitted, provider);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
