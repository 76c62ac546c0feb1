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
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "metainf/domain.h"
#include "metainf/embedding.h"
#include "metainf/perfdb.h"
#include "metainf/synth.h"

namespace metainf::testing {

// Reference latency table on 4 x L4 at batch 16 and 256.
inline const std::vector<MethodConfig>& ReferenceMethods() {
  static const std::vector<MethodConfig> m = {methods::kNone, methods::kContinuousBatching,
                                              methods::kChunkedPrefill,
                                              methods::kPrefixCaching, methods::kAll};
  return m;
}
inline std::vector<double> ReferenceBs16() { return {1435.27, 146.44, 128.70, 101.10, 96.21}; }
inline std::vector<double> ReferenceBs256() { return {1424.99, 107.40, 114.44, 68.46, 80.65}; }

inline HardwareProfile L4x4(double price = 3.2) {
  return {"l4x4", "L4", 4, 24.0, price, "4 x NVIDIA L4"};
}

inline TaskProfile ReferenceTask(const std::string& id, int batch) {
  TaskProfile t;
  t.id = id;
  t.description = "ShareGPT chat prompts";
  t.batch_size = batch;
  t.prompt_count = 1000;
  t.source_tag = "sharegpt";
  t.model = "llama-3.1-8b";
  return t;
}

// Two tasks (batch 16 and 256) on one hardware profile.
inline RecordStore ReferenceStore() {
  RecordStore s;
  const auto lo = ReferenceBs16();
  const auto hi = ReferenceBs256();
  for (std::size_t i = 0; i < ReferenceMethods().size(); ++i) {
    s.Add({"bs16", ReferenceMethods()[i], "l4x4", lo[i], std::nullopt});
    s.Add({"bs256", ReferenceMethods()[i], "l4x4", hi[i], std::nullopt});
  }
  return s;
}

inline Catalog ReferenceCatalog() {
  Catalog c;
  c.AddTask(ReferenceTask("bs16", 16));
  c.AddTask(ReferenceTask("bs256", 256));
  c.AddModel({"llama-3.1-8b", "llama", 8.0, "Llama 3.1 8B instruct"});
  c.AddHardware(L4x4());
  return c;
}

// Small calibrated synthetic set for selector tests.
inline const SynthData& SmallSynth() {
  static const SynthData d = [] {
    SynthSpec s = DefaultSynthSpec();
    s.train_tasks = 40;
    s.eval_tasks = 20;
    return GenerateSynthetic(s);
  }();
  return d;
}

inline std::shared_ptr<EmbeddingProvider> Fallback(int raw_dim = 384) {
  EmbeddingProviderSpec spec;
  spec.raw_dim = raw_dim;
  return std::make_shared<CachingProvider>(MakeProvider(spec));
}

inline Eigen::MatrixXd RandomMatrix(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(gen);
  return m;
}

// Gaussian elimination with partial pivoting on a dense square system.
inline std::vector<double> SolveDense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Ridge with unpenalized intercept via centered normal equations.
struct RidgeOracle {
  std::vector<double> w;
  double intercept = 0.0;
};
inline RidgeOracle SolveRidgeNormal(const std::vector<std::vector<double>>& x,
                                    const std::vector<double>& y, double lambda) {
  const std::size_t n = x.size(), d = x[0].size();
  std::vector<double> mx(d, 0.0);
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    my += y[i] / n;
    for (std::size_t j = 0; j < d; ++j) mx[j] += x[i][j] / n;
  }
  std::vector<std::vector<double>> a(d, std::vector<double>(d, 0.0));
  std::vector<double> b(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      b[j] += (x[i][j] - mx[j]) * (y[i] - my);
      for (std::size_t k = 0; k < d; ++k) a[j][k] += (x[i][j] - mx[j]) * (x[i][k] - mx[k]);
    }
  for (std::size_t j = 0; j < d; ++j) a[j][j] += lambda;
  RidgeOracle o;
  o.w = SolveDense(a, b);
  o.intercept = my;
  for (std::size_t j = 0; j < d; ++j) o.intercept -= mx[j] * o.w[j];
  return o;
}

}  // namespace metainf::testing
