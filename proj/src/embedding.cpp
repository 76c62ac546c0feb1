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

#include "metainf/embedding.h"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <regex>
#include <semaphore>

#include "metainf/error.h"

#include <httplib.h>
#include <json.hpp>

namespace metainf {

const char* ToString(PromptStyle style) {
  switch (style) {
    case PromptStyle::kOneHot:
      return "one_hot";
    case PromptStyle::kBasic:
      return "basic";
    case PromptStyle::kRich:
      return "rich";
    case PromptStyle::kCot:
      return "cot";
  }
  return "unknown";
}

std::optional<PromptStyle> ParsePromptStyle(std::string_view name) {
  if (name == "one_hot" || name == "onehot") return PromptStyle::kOneHot;
  if (name == "basic") return PromptStyle::kBasic;
  if (name == "rich") return PromptStyle::kRich;
  if (name == "cot") return PromptStyle::kCot;
  return std::nullopt;
}

std::string FormatThousands(long long value) {
  std::string digits = std::to_string(value < 0 ? -value : value);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  if (value < 0) out.push_back('-');
  return {out.rbegin(), out.rend()};
}

namespace {

// Shortest representation that parses back to the same double.
std::string FormatReal(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void RequireTextStyle(PromptStyle style) {
  if (style == PromptStyle::kOneHot) {
    throw UsageError("one_hot style has no text rendering");
  }
}

std::string OrUnspecified(const std::string& s) {
  return s.empty() ? "unspecified" : s;
}

std::string FlagList(const MethodConfig& m) {
  if (m == methods::kNone) return "none";
  std::string out;
  auto add = [&out](const char* part) {
    if (!out.empty()) out += ", ";
    out += part;
  };
  if (m.prefix_caching) add("prefix caching");
  if (m.chunked_prefill) add("chunked prefill");
  if (m.continuous_batching) add("continuous batching");
  return out;
}

const char* OnOff(bool flag) { return flag ? "enabled" : "disabled"; }

}  // namespace

std::string RenderPrompt(const TaskProfile& task, PromptStyle style) {
  RequireTextStyle(style);
  if (style == PromptStyle::kBasic) {
    return "Dataset: " + (task.source_tag.empty() ? task.id : task.source_tag);
  }
  std::string text = "Workload " + task.id + " serving model " +
                     OrUnspecified(task.model) + ". This dataset has " +
                     FormatThousands(task.prompt_count) + " samples";
  if (task.feature_count > 0) {
    text += " with " + FormatThousands(task.feature_count) + " features";
  }
  if (!task.objective.empty()) text += " for " + task.objective;
  text += ". Requests are processed with batch size " +
          FormatThousands(task.batch_size) + ". Source corpus: " +
          OrUnspecified(task.source_tag) + ". Description: " +
          task.description;
  if (style == PromptStyle::kCot) {
    text += " Reasoning: Step 1, a batch size of " +
            FormatThousands(task.batch_size) +
            " sets how many requests share each forward pass; larger batches "
            "amortize weight loading but raise KV-cache memory pressure. "
            "Step 2, " +
            FormatThousands(task.prompt_count) + " prompts drawn from " +
            OrUnspecified(task.source_tag) +
            " determine how often prompt prefixes repeat, which governs the "
            "benefit of prefix caching. Step 3, long prompts favor chunked "
            "prefill while bursty arrivals favor continuous batching. "
            "Therefore total runtime grows with prompt volume and depends on "
            "which acceleration flags match this workload.";
  }
  return text;
}

std::string RenderPrompt(const ModelProfile& model, PromptStyle style) {
  RequireTextStyle(style);
  if (style == PromptStyle::kBasic) return "Model: " + model.id;
  std::string text = "Model " + model.id + ": " +
                     OrUnspecified(model.family) +
                     " family transformer decoder with " +
                     FormatReal(model.parameters_b) +
                     " billion parameters. Description: " +
                     OrUnspecified(model.description) + ".";
  if (style == PromptStyle::kCot) {
    text += " Reasoning: Step 1, " + FormatReal(model.parameters_b) +
            " billion parameters fix the weight-loading cost per decoding "
            "step. Step 2, the attention layout of the " +
            OrUnspecified(model.family) +
            " family determines KV-cache size and how well cached prefixes "
            "can be reused. Therefore larger or cache-hungry models gain "
            "less from prefix caching under memory limits.";
  }
  return text;
}

std::string RenderPrompt(const MethodConfig& method, PromptStyle style) {
  RequireTextStyle(style);
  if (style == PromptStyle::kBasic) return "Methods: " + FlagList(method);
  std::string text = std::string("Acceleration configuration: prefix caching ") +
                     OnOff(method.prefix_caching) + ", chunked prefill " +
                     OnOff(method.chunked_prefill) + ", continuous batching " +
                     OnOff(method.continuous_batching) + ".";
  if (style == PromptStyle::kCot) {
    text +=
        " Reasoning: Step 1, prefix caching skips recomputation of shared "
        "prompt prefixes but holds cache memory. Step 2, chunked prefill "
        "splits prompt processing to bound latency spikes. Step 3, continuous "
        "batching refills the batch as requests finish. Therefore combined "
        "flags help small batches and may add overhead for large ones.";
  }
  return text;
}

std::string RenderPrompt(const HardwareProfile& hw, PromptStyle style) {
  RequireTextStyle(style);
  if (style == PromptStyle::kBasic) return "GPU: " + hw.gpu_class;
  std::string text = "Hardware " + hw.id + ": " +
                     std::to_string(hw.gpu_count) + "x NVIDIA " +
                     hw.gpu_class + " with " + FormatReal(hw.memory_gb) +
                     " GB memory per GPU. Description: " +
                     OrUnspecified(hw.description) + ".";
  if (style == PromptStyle::kCot) {
    text += " Reasoning: Step 1, " + FormatReal(hw.memory_gb) +
            " GB per GPU bounds the KV cache available for prefix reuse. "
            "Step 2, " +
            std::to_string(hw.gpu_count) +
            " GPUs under tensor parallelism add communication overhead, so "
            "scaling returns diminish. Therefore memory-constrained nodes "
            "penalize cache-heavy methods.";
  }
  return text;
}

std::string RenderPrompt(const ModelProfile& model, const MethodConfig& method,
                         PromptStyle style) {
  if (style == PromptStyle::kBasic) {
    return RenderPrompt(model, style) + "; " + RenderPrompt(method, style);
  }
  return RenderPrompt(model, style) + " " + RenderPrompt(method, style);
}

void EmbeddingProviderSpec::Validate() const {
  if (raw_dim < 1) throw UsageError("embedding raw_dim must be >= 1");
  if (!(timeout_s > 0.0)) throw UsageError("embedding timeout must be > 0");
  if (max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");
  if (kind == ProviderKind::kHttp && endpoint.empty()) {
    throw UsageError("http embedding provider requires an endpoint");
  }
}

namespace {

using Digest = std::array<unsigned char, 32>;

Digest Sha256(std::string_view data) {
  Digest out{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                             EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1) {
    throw IntegrityError("SHA-256 computation failed");
  }
  return out;
}

uint64_t LoadLe64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

// Counter-mode stream of 64-bit words: block i = SHA-256(seed || le64(i)).
class HashStream {
 public:
  explicit HashStream(const Digest& seed) : seed_(seed) {}

  uint64_t Next() {
    if (pos_ == 4) Refill();
    return words_[pos_++];
  }

  // Uniform in (0, 1].
  double NextUnit() {
    return static_cast<double>((Next() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  void Refill() {
    std::string block(reinterpret_cast<const char*>(seed_.data()),
                      seed_.size());
    for (int i = 0; i < 8; ++i) {
      block.push_back(static_cast<char>((counter_ >> (8 * i)) & 0xff));
    }
    Digest d = Sha256(block);
    for (int w = 0; w < 4; ++w) words_[w] = LoadLe64(d.data() + 8 * w);
    ++counter_;
    pos_ = 0;
  }

  Digest seed_;
  uint64_t counter_ = 0;
  std::array<uint64_t, 4> words_{};
  int pos_ = 4;
};

}  // namespace

std::string Sha256Hex(std::string_view data) {
  static constexpr char kHex[] = "0123456789abcdef";
  Digest d = Sha256(data);
  std::string out;
  out.reserve(64);
  for (unsigned char c : d) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

EmbeddingVector FallbackEmbed(std::string_view text, int raw_dim,
                              EntityKind kind) {
  if (text.empty()) throw DataError("cannot embed empty text");
  if (raw_dim < 1) throw UsageError("embedding raw_dim must be >= 1");
  std::string message = "metainf-fallback-v1";
  message.push_back('\0');
  message.append(text);
  message.push_back('\0');
  message += std::to_string(raw_dim);
  HashStream stream(Sha256(message));

  std::vector<double> values(static_cast<std::size_t>(raw_dim));
  for (std::size_t i = 0; i < values.size(); i += 2) {
    double radius = std::sqrt(-2.0 * std::log(stream.NextUnit()));
    double angle = 2.0 * M_PI * stream.NextUnit();
    values[i] = radius * std::cos(angle);
    if (i + 1 < values.size()) values[i + 1] = radius * std::sin(angle);
  }
  double norm = 0.0;
  for (double v : values) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : values) v /= norm;
  return EmbeddingVector{std::move(values), Provenance::kFallback, kind};
}

EmbeddingVector EmbeddingProvider::Embed(std::string_view text,
                                         EntityKind kind) const {
  auto out = EmbedBatch({std::string(text)}, kind);
  return std::move(out.front());
}

namespace {

class FallbackProvider : public EmbeddingProvider {
 public:
  explicit FallbackProvider(EmbeddingProviderSpec spec)
      : spec_(std::move(spec)) {}

  const EmbeddingProviderSpec& spec() const override { return spec_; }

  std::vector<EmbeddingVector> EmbedBatch(const std::vector<std::string>& texts,
                                          EntityKind kind) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) {
      out.push_back(FallbackEmbed(t, spec_.raw_dim, kind));
    }
    return out;
  }

 private:
  EmbeddingProviderSpec spec_;
};

// POSTs {"model", "input": [...]} and reads {"data": [{"embedding": [...]}]}.
class HttpProvider : public EmbeddingProvider {
 public:
  static constexpr std::size_t kBatchSize = 64;

  explicit HttpProvider(EmbeddingProviderSpec spec)
      : spec_(std::move(spec)), in_flight_(spec_.max_in_flight) {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(spec_.endpoint, m, kUrl)) {
      throw UsageError("invalid embedding endpoint '" + spec_.endpoint + "'");
    }
    base_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
  }

  const EmbeddingProviderSpec& spec() const override { return spec_; }

  std::vector<EmbeddingVector> EmbedBatch(const std::vector<std::string>& texts,
                                          EntityKind kind) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += kBatchSize) {
      std::vector<std::string> chunk(
          texts.begin() + static_cast<std::ptrdiff_t>(start),
          texts.begin() + static_cast<std::ptrdiff_t>(
                              std::min(texts.size(), start + kBatchSize)));
      for (auto& v : Request(chunk, kind)) out.push_back(std::move(v));
    }
    return out;
  }

 private:
  std::vector<EmbeddingVector> Request(const std::vector<std::string>& texts,
                                       EntityKind kind) const {
    for (const std::string& t : texts) {
      if (t.empty()) throw DataError("cannot embed empty text");
    }
    nlohmann::json body{{"model", spec_.model_name}, {"input", texts}};

    in_flight_.acquire();
    httplib::Result res;
    {
      httplib::Client client(base_);
      auto seconds = static_cast<time_t>(spec_.timeout_s);
      auto micros = static_cast<time_t>((spec_.timeout_s - seconds) * 1e6);
      client.set_connection_timeout(seconds, micros);
      client.set_read_timeout(seconds, micros);
      client.set_write_timeout(seconds, micros);
      res = client.Post(path_, body.dump(), "application/json");
    }
    in_flight_.release();

    if (!res) {
      throw ProviderError(0, "embedding request to " + spec_.endpoint +
                                 " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw ProviderError(res->status, "embedding provider returned HTTP " +
                                           std::to_string(res->status));
    }
    std::vector<EmbeddingVector> out;
    try {
      auto j = nlohmann::json::parse(res->body);
      const auto& data = j.at("data");
      if (!data.is_array() || data.size() != texts.size()) {
        throw ProviderError(res->status,
                            "embedding provider returned " +
                                std::to_string(data.size()) + " vectors for " +
                                std::to_string(texts.size()) + " inputs");
      }
      for (const auto& item : data) {
        auto values = item.at("embedding").get<std::vector<double>>();
        if (values.size() != static_cast<std::size_t>(spec_.raw_dim)) {
          throw ProviderError(
              res->status, "embedding dimension mismatch: provider returned " +
                               std::to_string(values.size()) + ", expected " +
                               std::to_string(spec_.raw_dim));
        }
        EmbeddingVector v{std::move(values), Provenance::kProvider, kind};
        v.Validate();
        out.push_back(std::move(v));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(res->status,
                          std::string("malformed embedding response: ") +
                              e.what());
    } catch (const DataError& e) {
      throw ProviderError(res->status, e.what());
    }
    return out;
  }

  EmbeddingProviderSpec spec_;
  std::string base_;
  std::string path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

}  // namespace

std::shared_ptr<EmbeddingProvider> MakeProvider(
    const EmbeddingProviderSpec& spec) {
  spec.Validate();
  if (spec.kind == ProviderKind::kHttp) {
    return std::make_shared<HttpProvider>(spec);
  }
  return std::make_shared<FallbackProvider>(spec);
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner)
    : inner_(std::move(inner)) {}

std::vector<EmbeddingVector> CachingProvider::EmbedBatch(
    const std::vector<std::string>& texts, EntityKind kind) const {
  std::vector<std::string> keys;
  keys.reserve(texts.size());
  for (const std::string& t : texts) keys.push_back(Sha256Hex(t));

  std::vector<std::optional<std::vector<double>>> found(texts.size());
  std::vector<std::string> missing;
  {
    std::shared_lock lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto it = cache_.find(keys[i]);
      if (it != cache_.end()) {
        found[i] = it->second;
      } else {
        missing.push_back(texts[i]);
      }
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_->EmbedBatch(missing, kind);
    std::unique_lock lock(mutex_);
    ++upstream_calls_;
    std::size_t next = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (found[i]) continue;
      cache_[keys[i]] = fresh[next].values;
      found[i] = std::move(fresh[next].values);
      ++next;
    }
  }
  Provenance provenance = inner_->spec().kind == ProviderKind::kHttp
                              ? Provenance::kProvider
                              : Provenance::kFallback;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (auto& f : found) {
    out.push_back(EmbeddingVector{std::move(*f), provenance, kind});
  }
  return out;
}

std::size_t CachingProvider::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::size_t CachingProvider::upstream_calls() const {
  std::shared_lock lock(mutex_);
  return upstream_calls_;
}

EmbeddingVector Embed(std::string_view text, const EmbeddingProviderSpec& spec,
                      EntityKind kind) {
  return MakeProvider(spec)->Embed(text, kind);
}

EmbeddingVector OneHot(std::string_view id,
                       const std::vector<std::string>& universe,
                       EntityKind kind) {
  auto it = std::find(universe.begin(), universe.end(), id);
  if (it == universe.end()) throw UnknownIdError(std::string(id));
  std::vector<double> values(universe.size(), 0.0);
  values[static_cast<std::size_t>(it - universe.begin())] = 1.0;
  return EmbeddingVector{std::move(values), Provenance::kFallback, kind};
}

}  // namespace metainf
