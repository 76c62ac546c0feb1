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

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "metainf/domain.h"

namespace metainf {

enum class PromptStyle { kOneHot, kBasic, kRich, kCot };

const char* ToString(PromptStyle style);
std::optional<PromptStyle> ParsePromptStyle(std::string_view name);

// Deterministic prompt text for each entity kind. `style` must not be
// kOneHot (UsageError). kBasic is a "Kind: <name>" keyword line; kRich is a
// structured template that includes every field except the hardware price,
// which only enters cost filtering; kCot appends a fixed reasoning scaffold
// to the rich text.
std::string RenderPrompt(const TaskProfile& task, PromptStyle style);
std::string RenderPrompt(const ModelProfile& model, PromptStyle style);
std::string RenderPrompt(const MethodConfig& method, PromptStyle style);
std::string RenderPrompt(const HardwareProfile& hw, PromptStyle style);
// The model-side entity: a served model running one acceleration method.
std::string RenderPrompt(const ModelProfile& model, const MethodConfig& method,
                         PromptStyle style);

// Version tag of the reasoning scaffold appended by PromptStyle::kCot.
inline constexpr const char* kCotScaffoldVersion = "cot-v1";

// Formats 10000 as "10,000".
std::string FormatThousands(long long value);

enum class ProviderKind { kFallback, kHttp };

struct EmbeddingProviderSpec {
  ProviderKind kind = ProviderKind::kFallback;
  std::string endpoint;  // http only, e.g. http://127.0.0.1:8080/v1/embeddings
  std::string model_name = "fallback-sha256";
  double timeout_s = 10.0;
  int raw_dim = 384;
  int max_in_flight = 4;

  // Throws UsageError on an inconsistent spec.
  void Validate() const;
};

// Pseudo-embedding: a SHA-256 digest of (text, raw_dim) seeds a counter-mode
// SHA-256 stream; raw_dim standard normals are drawn by Box-Muller and the
// result is scaled to unit length. Pure in (text, raw_dim).
EmbeddingVector FallbackEmbed(std::string_view text, int raw_dim,
                              EntityKind kind = EntityKind::kData);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const EmbeddingProviderSpec& spec() const = 0;
  // Raw (pre-reduction) vectors, one per text, each of spec().raw_dim.
  virtual std::vector<EmbeddingVector> EmbedBatch(
      const std::vector<std::string>& texts, EntityKind kind) const = 0;

  EmbeddingVector Embed(std::string_view text, EntityKind kind) const;
};

std::shared_ptr<EmbeddingProvider> MakeProvider(
    const EmbeddingProviderSpec& spec);

// Memoizes another provider by text digest. Safe for concurrent use; a race
// on the same key stores identical values.
class CachingProvider : public EmbeddingProvider {
 public:
  explicit CachingProvider(std::shared_ptr<EmbeddingProvider> inner);

  const EmbeddingProviderSpec& spec() const override { return inner_->spec(); }
  std::vector<EmbeddingVector> EmbedBatch(const std::vector<std::string>& texts,
                                          EntityKind kind) const override;

  std::size_t cache_size() const;
  std::size_t upstream_calls() const;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, std::vector<double>> cache_;
  mutable std::size_t upstream_calls_ = 0;
};

// Convenience wrapper: builds a provider for `spec` and embeds one text.
EmbeddingVector Embed(std::string_view text, const EmbeddingProviderSpec& spec,
                      EntityKind kind = EntityKind::kData);

// Indicator vector of length universe.size(); UnknownIdError when `id` is not
// in the universe.
EmbeddingVector OneHot(std::string_view id,
                       const std::vector<std::string>& universe,
                       EntityKind kind = EntityKind::kData);

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

}  // namespace metainf
